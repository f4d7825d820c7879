//! Shot loop with mid-circuit measurement and abort-and-restart.
//!
//! Every shot starts from a fresh state and executes the plan in order. A
//! nonzero outcome on a mid-circuit measurement ends the shot on the spot; the
//! remaining instructions are neither simulated nor charged. Shot `i` draws its
//! randomness from a ChaCha stream keyed by `(seed, i)`, so results do not
//! depend on how shots are scheduled across threads.

use std::collections::BTreeMap;
use std::ops::Range;

use num_complex::Complex64 as c64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::circuits::{CircuitPlan, Instruction};
use crate::error::{Error, Result};
use crate::statevector::{fidelity, normalized, StateVector};

/// Shots per work unit. Chunks are aligned to absolute shot indices.
const CHUNK: u64 = 512;

/// Cost units charged per executed instruction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// Uncontrolled block-encoding (SELECT) application.
    pub d: f64,
    /// Controlled SELECT.
    pub d_ctrl: f64,
    /// Each measurement instruction.
    pub m: f64,
    /// Each PREPARE or PREPARE†.
    pub prepare: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel { d: 1.0, d_ctrl: 1.0, m: 0.0, prepare: 0.0 }
    }
}

impl CostModel {
    pub fn new(d: f64, d_ctrl: f64, m: f64) -> Result<Self> {
        let c = CostModel { d, d_ctrl, m, prepare: 0.0 };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("d", self.d), ("d_ctrl", self.d_ctrl), ("m", self.m), ("prepare", self.prepare)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("cost {name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn weights(&self, plan: &CircuitPlan) -> Vec<f64> {
        plan.instructions
            .iter()
            .map(|ins| match ins {
                Instruction::Select { control: None, .. } => self.d,
                Instruction::Select { control: Some(_), .. } => self.d_ctrl,
                Instruction::MeasureExpectZero { .. } | Instruction::FinalMeasure { .. } => self.m,
                Instruction::Prepare { .. } | Instruction::AdjointPrepare { .. } => self.prepare,
            })
            .collect()
    }
}

/// Tally of a batch of shots.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub shots: u64,
    pub successes: u64,
    /// Aborts keyed by 1-based measurement step; the final measurement is step `mid + 1`.
    pub abort_histogram: BTreeMap<usize, u64>,
    /// How many shots reached each instruction.
    pub instruction_hits: Vec<u64>,
    /// Shots that executed exactly `p` instructions, for `p = 0..=len`.
    pub prefix_counts: Vec<u64>,
    pub weights: Vec<f64>,
    pub fidelity_sum: f64,
    pub fidelity_count: u64,
}

impl RunStats {
    fn empty(weights: Vec<f64>) -> Self {
        RunStats {
            shots: 0,
            successes: 0,
            abort_histogram: BTreeMap::new(),
            instruction_hits: vec![0; weights.len()],
            prefix_counts: vec![0; weights.len() + 1],
            weights,
            fidelity_sum: 0.0,
            fidelity_count: 0,
        }
    }

    /// Combines tallies of disjoint shot ranges of the same plan and cost model.
    pub fn merge(&mut self, other: &RunStats) {
        assert_eq!(self.weights, other.weights, "merging stats with different cost weights");
        self.shots += other.shots;
        self.successes += other.successes;
        for (k, v) in &other.abort_histogram {
            *self.abort_histogram.entry(*k).or_insert(0) += v;
        }
        for (a, b) in self.instruction_hits.iter_mut().zip(&other.instruction_hits) {
            *a += b;
        }
        for (a, b) in self.prefix_counts.iter_mut().zip(&other.prefix_counts) {
            *a += b;
        }
        self.fidelity_sum += other.fidelity_sum;
        self.fidelity_count += other.fidelity_count;
    }

    pub fn aborts(&self) -> u64 {
        self.abort_histogram.values().sum()
    }

    pub fn total_cost(&self) -> f64 {
        self.instruction_hits
            .iter()
            .zip(&self.weights)
            .map(|(h, w)| *h as f64 * w)
            .sum()
    }

    /// `(p̂, √(p̂(1−p̂)/N))`.
    pub fn estimate(&self) -> (f64, f64) {
        assert!(self.shots > 0, "estimate over zero shots");
        let n = self.shots as f64;
        let p = self.successes as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }

    pub fn mean_cost_per_shot(&self) -> f64 {
        assert!(self.shots > 0, "mean cost over zero shots");
        self.total_cost() / self.shots as f64
    }

    /// Standard error of [`Self::mean_cost_per_shot`] from the per-shot cost spread.
    pub fn cost_stderr(&self) -> f64 {
        assert!(self.shots > 0, "cost spread over zero shots");
        let n = self.shots as f64;
        let mean = self.mean_cost_per_shot();
        let mut cost = 0.0;
        let mut var = 0.0;
        for (p, count) in self.prefix_counts.iter().enumerate() {
            if p > 0 {
                cost += self.weights[p - 1];
            }
            var += *count as f64 * (cost - mean).powi(2);
        }
        (var / (n - 1.0).max(1.0) / n).sqrt()
    }

    /// Total cost spent per successful shot, including aborted attempts.
    pub fn cost_per_success(&self) -> f64 {
        if self.successes == 0 {
            f64::INFINITY
        } else {
            self.total_cost() / self.successes as f64
        }
    }

    /// Empirical conditional success rate of each measurement step given it was reached.
    pub fn step_success_rates(&self, steps: usize) -> Vec<f64> {
        let mut reached = self.shots;
        let mut out = Vec::with_capacity(steps);
        for s in 1..=steps {
            let failed = self.abort_histogram.get(&s).copied().unwrap_or(0);
            out.push(if reached == 0 { f64::NAN } else { (reached - failed) as f64 / reached as f64 });
            reached -= failed;
        }
        out
    }

    pub fn mean_fidelity(&self) -> Option<f64> {
        (self.fidelity_count > 0).then(|| self.fidelity_sum / self.fidelity_count as f64)
    }

    /// `step:count` pairs joined by `;`.
    pub fn histogram_string(&self) -> String {
        self.abort_histogram
            .iter()
            .map(|(k, v)| format!("{k}:{v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

pub fn estimate(stats: &RunStats) -> (f64, f64) {
    stats.estimate()
}

pub fn mean_cost_per_shot(stats: &RunStats) -> f64 {
    stats.mean_cost_per_shot()
}

enum ShotOutcome {
    Success(Vec<c64>),
    Abort(usize),
}

/// Reusable executor for one plan and initial system state.
pub struct ShotRunner<'a> {
    plan: &'a CircuitPlan,
    initial: StateVector,
    weights: Vec<f64>,
    reference: Option<Vec<c64>>,
    final_step: usize,
}

impl<'a> ShotRunner<'a> {
    pub fn new(plan: &'a CircuitPlan, psi: &[c64], weights: Vec<f64>) -> Result<Self> {
        if weights.len() != plan.instructions.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} cost weights for {} instructions",
                weights.len(),
                plan.instructions.len()
            )));
        }
        let initial = StateVector::init(&plan.layout, psi)?;
        Ok(ShotRunner { plan, initial, weights, reference: None, final_step: plan.mid_measurements() + 1 })
    }

    /// Records `|⟨ref|out⟩|²` for every successful shot.
    pub fn with_reference(mut self, reference: Vec<c64>) -> Result<Self> {
        if reference.len() != 1usize << self.plan.layout.n() {
            return Err(Error::LayoutMismatch("reference state has the wrong dimension".into()));
        }
        self.reference = Some(normalized(&reference));
        Ok(self)
    }

    fn shot(&self, seed: u64, index: u64) -> Result<(ShotOutcome, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let layout = &self.plan.layout;
        let mut state = self.initial.clone();
        let mut step = 0usize;
        for (pos, ins) in self.plan.instructions.iter().enumerate() {
            match ins {
                Instruction::Prepare { register, prep, control } => {
                    state.apply_prepare(layout.get(*register), prep, false, *control)?
                }
                Instruction::AdjointPrepare { register, prep, control } => {
                    state.apply_prepare(layout.get(*register), prep, true, *control)?
                }
                Instruction::Select { terms, control } => {
                    state.apply_select(&self.plan.hamiltonian, layout.get(*terms), layout.system(), *control)?
                }
                Instruction::MeasureExpectZero { register } => {
                    step += 1;
                    if state.measure_register(layout.get(*register), &mut rng)? != 0 {
                        return Ok((ShotOutcome::Abort(step), pos + 1));
                    }
                }
                Instruction::FinalMeasure { registers } => {
                    for r in registers {
                        if state.measure_register(layout.get(*r), &mut rng)? != 0 {
                            return Ok((ShotOutcome::Abort(self.final_step), pos + 1));
                        }
                    }
                }
            }
        }
        let out = normalized(&state.system_branch(layout.system()));
        Ok((ShotOutcome::Success(out), self.plan.instructions.len()))
    }

    fn run_chunk(&self, shots: Range<u64>, seed: u64) -> Result<RunStats> {
        let mut stats = RunStats::empty(self.weights.clone());
        let mut prefix = vec![0u64; self.weights.len() + 1];
        for i in shots {
            let (outcome, executed) = self.shot(seed, i)?;
            stats.shots += 1;
            prefix[executed] += 1;
            match outcome {
                ShotOutcome::Abort(step) => *stats.abort_histogram.entry(step).or_insert(0) += 1,
                ShotOutcome::Success(out) => {
                    stats.successes += 1;
                    if let Some(r) = &self.reference {
                        stats.fidelity_sum += fidelity(r, &out);
                        stats.fidelity_count += 1;
                    }
                }
            }
        }
        let mut reached = 0u64;
        for pos in (0..self.weights.len()).rev() {
            reached += prefix[pos + 1];
            stats.instruction_hits[pos] = reached;
        }
        stats.prefix_counts = prefix;
        Ok(stats)
    }

    /// Runs the shots with indices in `shots`.
    pub fn run(&self, shots: Range<u64>, seed: u64) -> Result<RunStats> {
        let mut bounds = Vec::new();
        let mut start = shots.start;
        while start < shots.end {
            let end = ((start / CHUNK + 1) * CHUNK).min(shots.end);
            bounds.push(start..end);
            start = end;
        }
        let parts: Vec<Result<RunStats>> = bounds.into_par_iter().map(|r| self.run_chunk(r, seed)).collect();
        let mut total = RunStats::empty(self.weights.clone());
        for p in parts {
            total.merge(&p?);
        }
        Ok(total)
    }
}

/// Runs shots `0..shots` of `plan` from system state `psi`.
pub fn run_shots(plan: &CircuitPlan, psi: &[c64], shots: u64, seed: u64, cost: &CostModel) -> Result<RunStats> {
    if shots == 0 {
        return Err(Error::InvalidArgument("need at least one shot".into()));
    }
    cost.validate()?;
    ShotRunner::new(plan, psi, cost.weights(plan))?.run(0..shots, seed)
}

/// Outcome of running a plan with every measurement forced to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactRun {
    /// Conditional probability of each zero outcome, in execution order.
    pub step_probabilities: Vec<f64>,
    pub success_probability: f64,
    /// Normalized post-selected system state, absent when a branch is dead.
    pub output: Option<Vec<c64>>,
}

/// Chain-rule evaluation of the all-zero branch by sequential projection.
pub fn exact_chain(plan: &CircuitPlan, psi: &[c64]) -> Result<ExactRun> {
    let layout = &plan.layout;
    let mut state = StateVector::init(layout, psi)?;
    let mut steps = Vec::new();
    let mut total = 1.0;
    for ins in &plan.instructions {
        let regs: Vec<_> = match ins {
            Instruction::Prepare { register, prep, control } => {
                state.apply_prepare(layout.get(*register), prep, false, *control)?;
                continue;
            }
            Instruction::AdjointPrepare { register, prep, control } => {
                state.apply_prepare(layout.get(*register), prep, true, *control)?;
                continue;
            }
            Instruction::Select { terms, control } => {
                state.apply_select(&plan.hamiltonian, layout.get(*terms), layout.system(), *control)?;
                continue;
            }
            Instruction::MeasureExpectZero { register } => vec![*register],
            Instruction::FinalMeasure { registers } => registers.clone(),
        };
        let mut p_step = 1.0;
        for r in regs {
            match state.project_register(layout.get(r), 0) {
                Ok(p) => p_step *= p,
                Err(Error::MeasurementDegenerate { probability }) => {
                    steps.push(p_step * probability);
                    return Ok(ExactRun { step_probabilities: steps, success_probability: 0.0, output: None });
                }
                Err(e) => return Err(e),
            }
        }
        steps.push(p_step);
        total *= p_step;
    }
    let output = normalized(&state.system_branch(layout.system()));
    Ok(ExactRun { step_probabilities: steps, success_probability: total, output: Some(output) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{build_w_hk, build_w_tilde};
    use crate::hamiltonian::Hamiltonian;
    use std::sync::Arc;

    fn zero_state(n: usize) -> Vec<c64> {
        let mut v = vec![c64::new(0.0, 0.0); 1 << n];
        v[0] = c64::new(1.0, 0.0);
        v
    }

    #[test]
    fn estimate_examples() {
        let mut s = RunStats::empty(vec![]);
        s.shots = 100;
        assert_eq!(s.estimate(), (0.0, 0.0));
        s.successes = 50;
        let (p, e) = s.estimate();
        assert_eq!(p, 0.5);
        assert!((e - 0.05).abs() < 1e-15);
        s.shots = 1000;
        s.successes = 250;
        let (p, e) = s.estimate();
        assert_eq!(p, 0.25);
        assert!((e - 0.013693063937629153).abs() < 1e-12);
    }

    #[test]
    fn zero_time_always_succeeds() {
        let h = Arc::new(Hamiltonian::ising(3, 1.0, 0.7).unwrap());
        let plan = build_w_tilde(h, 0.0, 2).unwrap();
        let stats = run_shots(&plan, &zero_state(3), 200, 9, &CostModel::default()).unwrap();
        assert_eq!(stats.successes, 200);
        assert!(stats.abort_histogram.is_empty());
    }

    #[test]
    fn unitary_block_encoding_never_aborts_mid_circuit() {
        let h = Arc::new(Hamiltonian::from_real(2, [("XZ".parse().unwrap(), 0.8)]).unwrap());
        let plan = build_w_tilde(h, 0.3, 2).unwrap();
        let stats = run_shots(&plan, &zero_state(2), 2000, 4, &CostModel::default()).unwrap();
        assert!(stats.abort_histogram.keys().all(|&k| k == plan.mid_measurements() + 1));
        assert!(stats.successes < 2000);
    }

    #[test]
    fn cost_accounting_simple_cases() {
        // L = 1: every block succeeds, k·d per shot
        let h = Arc::new(Hamiltonian::from_real(1, [("X".parse().unwrap(), 1.0)]).unwrap());
        let plan = build_w_hk(h, 3).unwrap();
        let cost = CostModel { d: 2.0, d_ctrl: 5.0, m: 0.0, prepare: 0.0 };
        let stats = run_shots(&plan, &zero_state(1), 50, 1, &cost).unwrap();
        assert_eq!(stats.successes, 50);
        assert_eq!(stats.mean_cost_per_shot(), 6.0);
    }

    #[test]
    fn success_output_for_single_term_power() {
        let h = Arc::new(Hamiltonian::from_real(1, [("X".parse().unwrap(), 1.0)]).unwrap());
        let plan = build_w_hk(h, 2).unwrap();
        let run = exact_chain(&plan, &zero_state(1)).unwrap();
        assert_eq!(run.success_probability, 1.0);
        let out = run.output.unwrap();
        // (−iX)²|0> = −|0>
        assert!((out[0] + 1.0).norm() < 1e-14);
    }

    #[test]
    fn histogram_invariant_and_determinism() {
        let h = Arc::new(Hamiltonian::ising(2, 1.0, 0.6).unwrap());
        let plan = build_w_tilde(h, 0.4, 2).unwrap();
        let psi = zero_state(2);
        let a = run_shots(&plan, &psi, 1500, 77, &CostModel::default()).unwrap();
        let b = run_shots(&plan, &psi, 1500, 77, &CostModel::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.successes + a.aborts(), a.shots);
        let c = run_shots(&plan, &psi, 1500, 78, &CostModel::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn aborted_tail_is_free() {
        let h = Arc::new(Hamiltonian::ising(2, 1.0, 0.6).unwrap());
        let plan = build_w_hk(h, 3).unwrap();
        let psi = zero_state(2);
        let stats = run_shots(&plan, &psi, 3000, 5, &CostModel::default()).unwrap();
        // instruction hits never increase along the plan
        assert!(stats.instruction_hits.windows(2).all(|w| w[0] >= w[1]));
        let reached_last = stats.instruction_hits.last().copied().unwrap();
        let aborted_before_last: u64 = stats.abort_histogram.iter().filter(|(k, _)| **k < 3).map(|(_, v)| v).sum();
        assert_eq!(reached_last, stats.shots - aborted_before_last);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = Arc::new(Hamiltonian::ising(2, 1.0, 0.6).unwrap());
        let plan = build_w_hk(h, 1).unwrap();
        assert!(run_shots(&plan, &zero_state(3), 10, 0, &CostModel::default()).is_err());
        assert!(run_shots(&plan, &zero_state(2), 0, 0, &CostModel::default()).is_err());
        assert!(CostModel::new(-1.0, 0.0, 0.0).is_err());
    }
}
