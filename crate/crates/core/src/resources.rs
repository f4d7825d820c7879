//! Compilation of circuit plans to single-qubit unitaries and CNOTs, gate
//! tallies, and a gate-level re-simulation used to check the compilation.
//!
//! State preparation uses the multiplexed-`Ry` tree (`2^w − 2` CNOTs on a
//! `w`-qubit register) followed by a diagonal phase stage when an amplitude
//! is not a nonnegative real. SELECT becomes one diagonal phase on the control
//! qubits plus, per system qubit, up to three uniformly controlled rotations
//! `Rz(a)·Ry(b)·Rz(c)`. Uniformly controlled rotations with `m ≥ 1` controls
//! use the Gray-code construction with `2^m` rotations and `2^m` CNOTs.
//!
//! Gate structure depends only on register widths and Pauli letters, never on
//! rotation angles, so plans that differ only in `τ` compile to the same counts.

use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64 as c64;
use serde::Serialize;

use crate::circuits::{CircuitFamily, CircuitPlan, Instruction};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::Pauli;
use crate::sampler::RunStats;
use crate::statevector::{normalized, Register, RegisterKind, StateVector};

pub type Matrix2 = [[c64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    OneQubit { qubit: usize, matrix: Matrix2 },
    Cnot { control: usize, target: usize },
    GlobalPhase(f64),
    /// Post-selected measurement of whole registers; `terminal` marks the final one.
    Measure { registers: Vec<Register>, terminal: bool },
}

impl Gate {
    fn adjoint(&self) -> Gate {
        match self {
            Gate::OneQubit { qubit, matrix: m } => Gate::OneQubit {
                qubit: *qubit,
                matrix: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]],
            },
            Gate::GlobalPhase(p) => Gate::GlobalPhase(-p),
            g => g.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct GateCounts {
    pub qubits: usize,
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub measurements: usize,
    pub select_blocks: usize,
}

/// Gate sequence of a plan, with the span of gates emitted for each instruction.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCircuit {
    pub qubits: usize,
    pub gates: Vec<Gate>,
    pub spans: Vec<Range<usize>>,
    pub select_blocks: usize,
}

fn ry(theta: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [[c64::new(c, 0.0), c64::new(-s, 0.0)], [c64::new(s, 0.0), c64::new(c, 0.0)]]
}

fn rz(theta: f64) -> Matrix2 {
    let z = c64::new(0.0, 0.0);
    [[c64::from_polar(1.0, -theta / 2.0), z], [z, c64::from_polar(1.0, theta / 2.0)]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Axis {
    Y,
    Z,
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Uniformly controlled rotation: for control value `x` (bit `i` ↔ `controls[i]`)
/// applies `R_axis(angles[x])` to `target`.
fn ucr(out: &mut Vec<Gate>, axis: Axis, target: usize, controls: &[usize], angles: &[f64]) {
    let rot = |t: f64| match axis {
        Axis::Y => ry(t),
        Axis::Z => rz(t),
    };
    let m = controls.len();
    debug_assert_eq!(angles.len(), 1 << m);
    if m == 0 {
        out.push(Gate::OneQubit { qubit: target, matrix: rot(angles[0]) });
        return;
    }
    let size = 1usize << m;
    let scale = 1.0 / size as f64;
    for i in 0..size {
        let g = gray(i);
        let phi: f64 = angles
            .iter()
            .enumerate()
            .map(|(x, a)| if (x & g).count_ones().is_multiple_of(2) { *a } else { -*a })
            .sum::<f64>()
            * scale;
        out.push(Gate::OneQubit { qubit: target, matrix: rot(phi) });
        let flip = gray(i) ^ gray((i + 1) % size);
        out.push(Gate::Cnot { control: controls[flip.trailing_zeros() as usize], target });
    }
}

/// Diagonal unitary `|x⟩ ↦ e^{iφ_x}|x⟩` over `qubits` (bit `i` ↔ `qubits[i]`).
fn diagonal(out: &mut Vec<Gate>, qubits: &[usize], phases: &[f64]) {
    let Some((&top, rest)) = qubits.split_last() else {
        out.push(Gate::GlobalPhase(phases[0]));
        return;
    };
    let half = phases.len() / 2;
    let theta: Vec<f64> = (0..half).map(|y| phases[y + half] - phases[y]).collect();
    let mean: Vec<f64> = (0..half).map(|y| (phases[y] + phases[y + half]) / 2.0).collect();
    ucr(out, Axis::Z, top, rest, &theta);
    diagonal(out, rest, &mean);
}

fn is_nonnegative_real(a: &c64) -> bool {
    a.im == 0.0 && a.re >= 0.0
}

/// `controls` plus an optional extra control appended as the highest bit.
fn with_control(controls: &[usize], control: Option<usize>) -> Vec<usize> {
    let mut c = controls.to_vec();
    c.extend(control);
    c
}

/// Angles for a multiplexor whose last control is `control` (if any): zero on
/// the control-|0⟩ half.
fn gated(angles: Vec<f64>, control: Option<usize>) -> Vec<f64> {
    match control {
        None => angles,
        Some(_) => {
            let mut a = vec![0.0; angles.len()];
            a.extend(angles);
            a
        }
    }
}

fn prepare_binary(out: &mut Vec<Gate>, qubits: &[usize], amps: &[c64], control: Option<usize>) {
    let w = qubits.len();
    for j in (0..w).rev() {
        let above = w - 1 - j;
        let angles: Vec<f64> = (0..1usize << above)
            .map(|y| {
                let block = |bit: usize| -> f64 {
                    let base = (y << (j + 1)) | (bit << j);
                    amps[base..base + (1 << j)].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
                };
                2.0 * block(1).atan2(block(0))
            })
            .collect();
        ucr(out, Axis::Y, qubits[j], &with_control(&qubits[j + 1..], control), &gated(angles, control));
    }
    if !amps.iter().all(is_nonnegative_real) {
        let phases: Vec<f64> = amps.iter().map(|a| a.arg()).collect();
        diagonal(out, &with_control(qubits, control), &gated(phases, control));
    }
}

/// Unary register: amplitudes live on `|1^k 0^{K−k}⟩`; qubit `j` is rotated
/// conditioned on qubit `j−1`.
fn prepare_unary(out: &mut Vec<Gate>, qubits: &[usize], amps: &[c64], control: Option<usize>) -> Result<()> {
    let order = qubits.len();
    let weights: Vec<c64> = (0..=order).map(|k| amps[(1usize << k) - 1]).collect();
    let on_pattern: f64 = weights.iter().map(|a| a.norm_sqr()).sum();
    if (on_pattern - 1.0).abs() > 1e-10 || !weights.iter().all(is_nonnegative_real) {
        return Err(Error::InvalidArgument(
            "unary register amplitudes must be nonnegative and supported on 1^k 0^(K-k)".into(),
        ));
    }
    let mut tail: Vec<f64> = vec![0.0; order + 2];
    for k in (0..=order).rev() {
        tail[k] = tail[k + 1] + weights[k].norm_sqr();
    }
    for j in 0..order {
        let theta = 2.0 * tail[j + 1].sqrt().atan2(weights[j].re);
        let (controls, angles) = if j == 0 { (vec![], vec![theta]) } else { (vec![qubits[j - 1]], vec![0.0, theta]) };
        ucr(out, Axis::Y, qubits[j], &with_control(&controls, control), &gated(angles, control));
    }
    Ok(())
}

fn prepare(out: &mut Vec<Gate>, reg: &Register, amps: &[c64], control: Option<usize>) -> Result<()> {
    let qubits: Vec<usize> = reg.qubits().collect();
    if reg.kind == RegisterKind::UnaryCoefficients {
        prepare_unary(out, &qubits, amps, control)
    } else {
        prepare_binary(out, &qubits, amps, control);
        Ok(())
    }
}

/// `σ = e^{iφ}·Rz(a)·Ry(b)·Rz(c)`.
fn zyz(p: Pauli) -> (f64, f64, f64, f64) {
    match p {
        Pauli::I => (0.0, 0.0, 0.0, 0.0),
        Pauli::X => (PI / 2.0, 0.0, PI, PI),
        Pauli::Y => (PI / 2.0, 0.0, PI, 0.0),
        Pauli::Z => (PI / 2.0, PI, 0.0, 0.0),
    }
}

fn select(out: &mut Vec<Gate>, h: &Hamiltonian, terms: &Register, system: &Register, control: Option<usize>) {
    let controls = with_control(&terms.qubits().collect::<Vec<_>>(), control);
    let lmask = (1usize << terms.width) - 1;
    let size = 1usize << controls.len();
    let active = |x: usize| -> Option<usize> {
        let on = control.is_none() || x >> terms.width == 1;
        let l = x & lmask;
        (on && l < h.len()).then_some(l)
    };
    let mut phases: Vec<f64> = (0..size)
        .map(|x| active(x).map_or(0.0, |l| h.terms()[l].phase - PI / 2.0))
        .collect();
    for q in 0..system.width {
        let letters: Vec<Pauli> = h.terms().iter().map(|t| t.letters.get(q)).collect();
        let params: Vec<(f64, f64, f64, f64)> =
            (0..size).map(|x| active(x).map_or((0.0, 0.0, 0.0, 0.0), |l| zyz(letters[l]))).collect();
        for (x, p) in params.iter().enumerate() {
            phases[x] += p.0;
        }
        let target = system.qubit(q);
        if letters.contains(&Pauli::X) {
            ucr(out, Axis::Z, target, &controls, &params.iter().map(|p| p.3).collect::<Vec<_>>());
        }
        if letters.iter().any(|p| matches!(p, Pauli::X | Pauli::Y)) {
            ucr(out, Axis::Y, target, &controls, &params.iter().map(|p| p.2).collect::<Vec<_>>());
        }
        if letters.contains(&Pauli::Z) {
            ucr(out, Axis::Z, target, &controls, &params.iter().map(|p| p.1).collect::<Vec<_>>());
        }
    }
    diagonal(out, &controls, &phases);
}

/// Lowers every instruction of `plan` to gates.
pub fn compile(plan: &CircuitPlan) -> Result<CompiledCircuit> {
    let layout = &plan.layout;
    let mut gates = Vec::new();
    let mut spans = Vec::with_capacity(plan.instructions.len());
    for ins in &plan.instructions {
        let start = gates.len();
        match ins {
            Instruction::Prepare { register, prep, control } => {
                prepare(&mut gates, layout.get(*register), prep.amplitudes(), *control)?
            }
            Instruction::AdjointPrepare { register, prep, control } => {
                let mut fwd = Vec::new();
                prepare(&mut fwd, layout.get(*register), prep.amplitudes(), *control)?;
                gates.extend(fwd.iter().rev().map(Gate::adjoint));
            }
            Instruction::Select { terms, control } => {
                select(&mut gates, &plan.hamiltonian, layout.get(*terms), layout.system(), *control)
            }
            Instruction::MeasureExpectZero { register } => {
                gates.push(Gate::Measure { registers: vec![*layout.get(*register)], terminal: false })
            }
            Instruction::FinalMeasure { registers } => gates.push(Gate::Measure {
                registers: registers.iter().map(|r| *layout.get(*r)).collect(),
                terminal: true,
            }),
        }
        spans.push(start..gates.len());
    }
    Ok(CompiledCircuit { qubits: layout.total(), gates, spans, select_blocks: plan.select_count() })
}

fn tally(gates: &[Gate]) -> (usize, usize, usize) {
    let mut t = (0, 0, 0);
    for g in gates {
        match g {
            Gate::OneQubit { .. } => t.0 += 1,
            Gate::Cnot { .. } => t.1 += 1,
            Gate::Measure { registers, .. } => t.2 += registers.iter().map(|r| r.width).sum::<usize>(),
            Gate::GlobalPhase(_) => {}
        }
    }
    t
}

impl CompiledCircuit {
    pub fn counts(&self) -> GateCounts {
        let (one_qubit, two_qubit, measurements) = tally(&self.gates);
        GateCounts { qubits: self.qubits, one_qubit, two_qubit, measurements, select_blocks: self.select_blocks }
    }

    /// Two-qubit gates emitted for each plan instruction; usable as sampler cost weights.
    pub fn two_qubit_per_instruction(&self) -> Vec<f64> {
        self.spans.iter().map(|s| tally(&self.gates[s.clone()]).1 as f64).collect()
    }

    /// Mean two-qubit gates actually executed per shot, counting aborted prefixes.
    pub fn executed_two_qubit_per_shot(&self, stats: &RunStats) -> Result<f64> {
        if stats.instruction_hits.len() != self.spans.len() {
            return Err(Error::LayoutMismatch("run statistics belong to a different plan".into()));
        }
        if stats.shots == 0 {
            return Err(Error::InvalidArgument("no shots recorded".into()));
        }
        let total: f64 = stats
            .instruction_hits
            .iter()
            .zip(self.two_qubit_per_instruction())
            .map(|(h, w)| *h as f64 * w)
            .sum();
        Ok(total / stats.shots as f64)
    }

    /// Runs the gate list with every measurement projected onto zero. Returns
    /// the all-zero probability and the normalized system output.
    pub fn post_selected(&self, plan: &CircuitPlan, psi: &[c64]) -> Result<(f64, Vec<c64>)> {
        let mut state = StateVector::init(&plan.layout, psi)?;
        let mut prob = 1.0;
        for g in &self.gates {
            match g {
                Gate::OneQubit { qubit, matrix } => state.apply_single_qubit(*qubit, matrix),
                Gate::Cnot { control, target } => state.apply_cnot(*control, *target),
                Gate::GlobalPhase(p) => state.apply_global_phase(*p),
                Gate::Measure { registers, .. } => {
                    for r in registers {
                        prob *= state.project_register(r, 0)?;
                    }
                }
            }
        }
        Ok((prob, normalized(&state.system_branch(plan.layout.system()))))
    }
}

pub fn count(plan: &CircuitPlan) -> Result<GateCounts> {
    Ok(compile(plan)?.counts())
}

/// One line of a gate-count table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResourceRow {
    pub family: &'static str,
    #[serde(rename = "K")]
    pub k: usize,
    pub kappa: Option<usize>,
    pub qubits: usize,
    pub two_qubit: usize,
    pub measurements: usize,
}

pub fn resource_row(plan: &CircuitPlan) -> Result<ResourceRow> {
    let c = count(plan)?;
    Ok(ResourceRow {
        family: plan.family.name(),
        k: plan.order(),
        kappa: (plan.family == CircuitFamily::Shallow).then(|| plan.layout.kappa()),
        qubits: c.qubits,
        two_qubit: c.two_qubit,
        measurements: c.measurements,
    })
}
