//! Dense statevector engine for multi-register LCU circuits.
//!
//! Qubit `q` is bit `q` of a basis-state index. Registers occupy contiguous
//! qubit ranges; the standard layouts put the system register at the bottom
//! (qubits `0..n`), the term-index register(s) above it and the Taylor
//! coefficient register on top.

use num_complex::Complex64 as c64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

/// Default cap on the total simulated width.
pub const STATE_CAP: usize = 24;
/// Largest layout that can be described (basis indices are machine words).
pub const LAYOUT_CAP: usize = 63;

/// Tolerance on input normalization.
pub const NORM_TOL: f64 = 1e-10;

/// Branch probabilities below this are treated as numerically dead.
pub const DEAD_BRANCH: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegisterKind {
    System,
    /// Term-index (ℓ) register holding PREPARE(α).
    Terms,
    /// Binary-encoded Taylor coefficient (k) register.
    Coefficients,
    /// One-hot/unary Taylor coefficient register.
    UnaryCoefficients,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Register {
    pub kind: RegisterKind,
    pub offset: usize,
    pub width: usize,
}

impl Register {
    pub fn mask(&self) -> usize {
        ((1usize << self.width) - 1) << self.offset
    }

    #[inline]
    pub fn value_of(&self, index: usize) -> usize {
        (index >> self.offset) & ((1usize << self.width) - 1)
    }

    pub fn qubit(&self, i: usize) -> usize {
        assert!(i < self.width, "qubit {i} outside register of width {}", self.width);
        self.offset + i
    }

    pub fn qubits(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.width
    }
}

/// Index into [`RegisterLayout::registers`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegisterId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total: usize,
    kappa: usize,
    l_width: usize,
    n: usize,
}

impl RegisterLayout {
    pub const SYSTEM: RegisterId = RegisterId(0);
    pub const TERMS: RegisterId = RegisterId(1);

    /// Shallow layout: system, one ℓ-register, and a `kappa`-qubit k-register
    /// (omitted when `kappa == 0`).
    pub fn shallow(kappa: usize, l_width: usize, n: usize) -> Result<Self> {
        if l_width == 0 || n == 0 {
            return Err(Error::LayoutMismatch("register widths must be positive".into()));
        }
        let mut registers = vec![
            Register { kind: RegisterKind::System, offset: 0, width: n },
            Register { kind: RegisterKind::Terms, offset: n, width: l_width },
        ];
        if kappa > 0 {
            registers.push(Register { kind: RegisterKind::Coefficients, offset: n + l_width, width: kappa });
        }
        Self::checked(registers, kappa, l_width, n)
    }

    /// Unary reference layout: system, `k_order` ℓ-registers, and a `k_order`-qubit
    /// unary coefficient register.
    pub fn unary(k_order: usize, l_width: usize, n: usize) -> Result<Self> {
        if k_order == 0 {
            return Err(Error::LayoutMismatch("register widths must be positive".into()));
        }
        Self::with_term_copies(n, l_width, k_order, Some((RegisterKind::UnaryCoefficients, k_order)))
    }

    /// System, `copies` ℓ-registers stacked above it, then an optional coefficient register.
    pub fn with_term_copies(
        n: usize,
        l_width: usize,
        copies: usize,
        coefficients: Option<(RegisterKind, usize)>,
    ) -> Result<Self> {
        if l_width == 0 || n == 0 || copies == 0 {
            return Err(Error::LayoutMismatch("register widths must be positive".into()));
        }
        let mut registers = vec![Register { kind: RegisterKind::System, offset: 0, width: n }];
        for j in 0..copies {
            registers.push(Register { kind: RegisterKind::Terms, offset: n + j * l_width, width: l_width });
        }
        let mut kappa = 0;
        if let Some((kind, width)) = coefficients {
            if width > 0 {
                registers.push(Register { kind, offset: n + copies * l_width, width });
                kappa = width;
            }
        }
        Self::checked(registers, kappa, l_width, n)
    }

    fn checked(registers: Vec<Register>, kappa: usize, l_width: usize, n: usize) -> Result<Self> {
        let total = registers.iter().map(|r| r.width).sum();
        if total > LAYOUT_CAP {
            return Err(Error::ResourceLimit { what: "register layout", qubits: total, cap: LAYOUT_CAP });
        }
        Ok(RegisterLayout { registers, total, kappa, l_width, n })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn get(&self, id: RegisterId) -> &Register {
        &self.registers[id.0]
    }

    pub fn system(&self) -> &Register {
        &self.registers[0]
    }

    /// The coefficient register (binary or unary), if any.
    pub fn coefficients_id(&self) -> Option<RegisterId> {
        self.registers
            .iter()
            .position(|r| matches!(r.kind, RegisterKind::Coefficients | RegisterKind::UnaryCoefficients))
            .map(RegisterId)
    }

    /// Ids of all ℓ-registers in order.
    pub fn term_ids(&self) -> Vec<RegisterId> {
        self.registers
            .iter()
            .enumerate()
            .filter(|(_, r)| r.kind == RegisterKind::Terms)
            .map(|(i, _)| RegisterId(i))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Width of the coefficient register (κ for binary, K for unary).
    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn l_width(&self) -> usize {
        self.l_width
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// A PREPARE unitary completed by a Householder reflection: `U = φ·(I − 2uu†)`
/// with `U|0…0⟩ = amps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Preparation {
    amps: Vec<c64>,
    phase: c64,
    u: Option<Vec<c64>>,
}

impl Preparation {
    pub fn new(amps: Vec<c64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::LayoutMismatch(format!(
                "amplitude vector length {} is not a power of two",
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Normalization { norm });
        }
        let a0 = amps[0];
        let phase = if a0.norm() > 0.0 { a0 / a0.norm() } else { c64::new(1.0, 0.0) };
        let mut v: Vec<c64> = amps.iter().map(|a| -(phase.conj() * a)).collect();
        v[0] += 1.0;
        let vnorm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let u = if vnorm < 1e-15 {
            None
        } else {
            Some(v.into_iter().map(|x| x / vnorm).collect())
        };
        Ok(Preparation { amps, phase, u })
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    pub fn width(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    fn apply_slice(&self, x: &mut [c64], adjoint: bool) {
        let phase = if adjoint { self.phase.conj() } else { self.phase };
        if let Some(u) = &self.u {
            let dot: c64 = u.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
            let s = 2.0 * dot;
            for (xi, ui) in x.iter_mut().zip(u) {
                *xi -= ui * s;
            }
        }
        if phase != c64::new(1.0, 0.0) {
            for xi in x.iter_mut() {
                *xi *= phase;
            }
        }
    }

    /// Dense matrix of the completed unitary (row-major), for tests and compilation checks.
    pub fn matrix(&self, adjoint: bool) -> Vec<Vec<c64>> {
        let d = self.amps.len();
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let mut e = vec![c64::new(0.0, 0.0); d];
            e[j] = c64::new(1.0, 0.0);
            self.apply_slice(&mut e, adjoint);
            cols.push(e);
        }
        (0..d).map(|i| (0..d).map(|j| cols[j][i]).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<c64>,
}

impl StateVector {
    /// Ancillas in `|0…0⟩`, system register holding `psi`.
    pub fn init(layout: &RegisterLayout, psi: &[c64]) -> Result<Self> {
        let sys = layout.system();
        if psi.len() != 1usize << sys.width {
            return Err(Error::LayoutMismatch(format!(
                "system state has {} amplitudes, register needs {}",
                psi.len(),
                1usize << sys.width
            )));
        }
        check_normalized(psi)?;
        if layout.total() > STATE_CAP {
            return Err(Error::ResourceLimit { what: "statevector", qubits: layout.total(), cap: STATE_CAP });
        }
        let mut amps = vec![c64::new(0.0, 0.0); 1usize << layout.total()];
        for (s, a) in psi.iter().enumerate() {
            amps[s << sys.offset] = *a;
        }
        Ok(StateVector { n_qubits: layout.total(), amps })
    }

    pub fn from_amplitudes(amps: Vec<c64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::LayoutMismatch("amplitude count is not a power of two".into()));
        }
        check_normalized(&amps)?;
        let n_qubits = amps.len().trailing_zeros() as usize;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_register(&self, reg: &Register) -> Result<()> {
        if reg.offset + reg.width > self.n_qubits {
            return Err(Error::LayoutMismatch(format!(
                "register [{}, {}) outside {}-qubit state",
                reg.offset,
                reg.offset + reg.width,
                self.n_qubits
            )));
        }
        Ok(())
    }

    /// Applies PREPARE (or its adjoint) to `reg`, optionally controlled on qubit `control`.
    pub fn apply_prepare(
        &mut self,
        reg: &Register,
        prep: &Preparation,
        adjoint: bool,
        control: Option<usize>,
    ) -> Result<()> {
        self.check_register(reg)?;
        if prep.width() != reg.width {
            return Err(Error::LayoutMismatch(format!(
                "preparation of width {} on register of width {}",
                prep.width(),
                reg.width
            )));
        }
        if let Some(c) = control {
            if c >= self.n_qubits || (reg.mask() >> c) & 1 == 1 {
                return Err(Error::LayoutMismatch(format!("invalid control qubit {c}")));
            }
        }
        let d = 1usize << reg.width;
        let stride = 1usize << reg.offset;
        let lo_count = stride;
        let hi_count = self.amps.len() >> (reg.offset + reg.width);
        let mut buf = vec![c64::new(0.0, 0.0); d];
        for hi in 0..hi_count {
            for lo in 0..lo_count {
                let base = (hi << (reg.offset + reg.width)) | lo;
                if let Some(c) = control {
                    if (base >> c) & 1 == 0 {
                        continue;
                    }
                }
                for (v, b) in buf.iter_mut().enumerate() {
                    *b = self.amps[base + v * stride];
                }
                prep.apply_slice(&mut buf, adjoint);
                for (v, b) in buf.iter().enumerate() {
                    self.amps[base + v * stride] = *b;
                }
            }
        }
        Ok(())
    }

    /// SELECT(H̃): on ℓ-register value `ℓ < L` applies `(−i)·e^{iθ_ℓ}·P_ℓ` to the
    /// system, identity on padding values. With `control`, only the control-|1⟩
    /// branch is acted on.
    pub fn apply_select(
        &mut self,
        h: &Hamiltonian,
        terms: &Register,
        system: &Register,
        control: Option<usize>,
    ) -> Result<()> {
        self.check_register(terms)?;
        self.check_register(system)?;
        if system.width != h.n_qubits() {
            return Err(Error::LayoutMismatch(format!(
                "Hamiltonian on {} qubits, system register has {}",
                h.n_qubits(),
                system.width
            )));
        }
        if (1usize << terms.width) < h.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} terms do not fit an ℓ-register of width {}",
                h.len(),
                terms.width
            )));
        }
        let coeffs: Vec<c64> = h
            .terms()
            .iter()
            .map(|t| c64::new(0.0, -1.0) * c64::from_polar(1.0, t.phase))
            .collect();
        let smask = (1usize << system.width) - 1;
        let mut out = vec![c64::new(0.0, 0.0); self.amps.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            if a == c64::new(0.0, 0.0) {
                continue;
            }
            let active = control.is_none_or(|c| (i >> c) & 1 == 1);
            let l = terms.value_of(i);
            if !active || l >= coeffs.len() {
                out[i] += a;
                continue;
            }
            let s = (i >> system.offset) & smask;
            let (s2, f) = h.terms()[l].letters.apply_to_basis(s);
            let j = (i & !(smask << system.offset)) | (s2 << system.offset);
            out[j] += coeffs[l] * f * a;
        }
        self.amps = out;
        Ok(())
    }

    /// Born-rule probabilities of each value of `reg`.
    pub fn register_probabilities(&self, reg: &Register) -> Vec<f64> {
        let mut p = vec![0.0; 1usize << reg.width];
        for (i, a) in self.amps.iter().enumerate() {
            p[reg.value_of(i)] += a.norm_sqr();
        }
        p
    }

    /// Projects `reg` onto `value` and renormalizes; returns the branch probability.
    pub fn project_register(&mut self, reg: &Register, value: usize) -> Result<f64> {
        self.check_register(reg)?;
        let p: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| reg.value_of(*i) == value)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if p < DEAD_BRANCH {
            return Err(Error::MeasurementDegenerate { probability: p });
        }
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if reg.value_of(i) == value {
                *a *= scale;
            } else {
                *a = c64::new(0.0, 0.0);
            }
        }
        Ok(p)
    }

    /// Samples a computational-basis outcome of `reg`, collapses and renormalizes.
    pub fn measure_register<R: Rng + ?Sized>(&mut self, reg: &Register, rng: &mut R) -> Result<usize> {
        self.check_register(reg)?;
        let probs = self.register_probabilities(reg);
        let total: f64 = probs.iter().sum();
        if total < DEAD_BRANCH {
            return Err(Error::MeasurementDegenerate { probability: total });
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut outcome = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for (v, &p) in probs.iter().enumerate() {
            acc += p;
            if u < acc && p > 0.0 {
                outcome = v;
                break;
            }
        }
        self.project_register(reg, outcome)?;
        Ok(outcome)
    }

    /// System amplitudes on the branch where every other qubit is zero, unnormalized.
    pub fn system_branch(&self, system: &Register) -> Vec<c64> {
        (0..1usize << system.width)
            .map(|s| self.amps[s << system.offset])
            .collect()
    }

    /// Applies a 2×2 unitary `[[m00, m01], [m10, m11]]` to qubit `q`.
    pub fn apply_single_qubit(&mut self, q: usize, m: &[[c64; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    /// `m` on `q` where qubit `control` is `|1⟩`.
    pub fn apply_controlled_single_qubit(&mut self, control: usize, q: usize, m: &[[c64; 2]; 2]) {
        assert_ne!(control, q, "control and target coincide");
        let (cb, bit) = (1usize << control, 1usize << q);
        for i in 0..self.amps.len() {
            if i & bit == 0 && i & cb != 0 {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_global_phase(&mut self, phase: f64) {
        let f = c64::from_polar(1.0, phase);
        for a in &mut self.amps {
            *a *= f;
        }
    }
}

pub fn check_normalized(v: &[c64]) -> Result<()> {
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::Normalization { norm });
    }
    Ok(())
}

/// `|⟨a|b⟩|²`.
pub fn fidelity(a: &[c64], b: &[c64]) -> f64 {
    assert_eq!(a.len(), b.len(), "fidelity of vectors with different lengths");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<c64>().norm_sqr()
}

pub fn normalized(v: &[c64]) -> Vec<c64> {
    let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|a| a / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::PauliString;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Vec<c64> {
        let v: Vec<c64> = (0..1 << n)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        normalized(&v)
    }

    #[test]
    fn init_examples() {
        let layout = RegisterLayout::shallow(1, 1, 1).unwrap();
        let s = StateVector::init(&layout, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert_eq!(s.amplitudes().len(), 8);

        let plus = [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)];
        let s = StateVector::init(&layout, &plus).unwrap();
        let nz: Vec<_> = s.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
        assert_eq!(nz.len(), 2);
        assert!(nz.iter().all(|a| (a.re - FRAC_1_SQRT_2).abs() < 1e-15));

        let bad = [c(0.9, 0.0), c(0.0, 0.0)];
        assert!(matches!(StateVector::init(&layout, &bad), Err(Error::Normalization { .. })));
    }

    #[test]
    fn prepare_trivial_and_inverse() {
        let layout = RegisterLayout::shallow(2, 2, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let full = random_state(6, &mut rng);
        let mut s = StateVector::from_amplitudes(full.clone()).unwrap();
        let id = Preparation::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        s.apply_prepare(layout.get(RegisterLayout::TERMS), &id, false, None).unwrap();
        assert!(fidelity(s.amplitudes(), &full) > 1.0 - 1e-14);

        let amps = random_state(2, &mut rng);
        let p = Preparation::new(amps).unwrap();
        let reg = layout.get(RegisterLayout::TERMS);
        s.apply_prepare(reg, &p, false, None).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        s.apply_prepare(reg, &p, true, None).unwrap();
        assert!(fidelity(s.amplitudes(), &full) >= 1.0 - 1e-12);
        for (a, b) in s.amplitudes().iter().zip(&full) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn prepare_first_column_is_amplitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for w in 1..4 {
            let amps = random_state(w, &mut rng);
            let m = Preparation::new(amps.clone()).unwrap().matrix(false);
            for (i, a) in amps.iter().enumerate() {
                assert!((m[i][0] - a).norm() < 1e-14);
            }
            // unitary
            let d = 1 << w;
            for i in 0..d {
                for j in 0..d {
                    let dot: c64 = (0..d).map(|k| m[k][i].conj() * m[k][j]).sum();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - want).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn prepare_ising_register() {
        let h = Hamiltonian::ising(4, 1.0, 0.5).unwrap();
        let layout = RegisterLayout::shallow(0, 3, 4).unwrap();
        let mut psi = vec![c(0.0, 0.0); 16];
        psi[0] = c(1.0, 0.0);
        let mut s = StateVector::init(&layout, &psi).unwrap();
        let p = Preparation::new(h.prepare_amplitudes(3).unwrap()).unwrap();
        let reg = *layout.get(RegisterLayout::TERMS);
        s.apply_prepare(&reg, &p, false, None).unwrap();
        let want = [0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1, 0.0];
        for (l, w) in want.iter().enumerate() {
            let a = s.amplitudes()[l << 4];
            assert!((a - c(f64::sqrt(*w), 0.0)).norm() < 1e-14, "ℓ={l}: {a}");
        }
    }

    #[test]
    fn prepare_rejects_unnormalized() {
        assert!(matches!(
            Preparation::new(vec![c(0.5, 0.0), c(0.5, 0.0)]),
            Err(Error::Normalization { .. })
        ));
    }

    #[test]
    fn select_examples() {
        // L = 1, H = X
        let h = Hamiltonian::from_real(1, [("X".parse().unwrap(), 1.0)]).unwrap();
        let layout = RegisterLayout::shallow(0, 1, 1).unwrap();
        let mut s = StateVector::init(&layout, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        s.apply_select(&h, layout.get(RegisterLayout::TERMS), layout.system(), None).unwrap();
        assert!((s.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);

        // padding value leaves the system alone
        let mut s = StateVector::from_amplitudes(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        s.apply_select(&h, layout.get(RegisterLayout::TERMS), layout.system(), None).unwrap();
        assert_eq!(s.amplitudes()[2], c(1.0, 0.0));

        // uniform superposition over {X0, Z0}
        let h = Hamiltonian::from_real(1, [("X".parse().unwrap(), 1.0), ("Z".parse().unwrap(), 1.0)]).unwrap();
        let mut s = StateVector::init(&layout, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p = Preparation::new(h.prepare_amplitudes(1).unwrap()).unwrap();
        let terms = *layout.get(RegisterLayout::TERMS);
        s.apply_prepare(&terms, &p, false, None).unwrap();
        s.apply_select(&h, &terms, layout.system(), None).unwrap();
        // index = sys | ℓ<<1: |ℓ=0>|1> -> 1, |ℓ=1>|0> -> 2
        let r = c(0.0, -FRAC_1_SQRT_2);
        assert!((s.amplitudes()[1] - r).norm() < 1e-15);
        assert!((s.amplitudes()[2] - r).norm() < 1e-15);
        assert!(s.amplitudes()[0].norm() < 1e-15 && s.amplitudes()[3].norm() < 1e-15);
    }

    #[test]
    fn select_twice_single_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = Hamiltonian::canonicalize(2, [("XY".parse::<PauliString>().unwrap(), c(0.0, 0.7))]).unwrap();
        let layout = RegisterLayout::shallow(0, 1, 2).unwrap();
        let psi = random_state(2, &mut rng);
        let mut s = StateVector::init(&layout, &psi).unwrap();
        let reg = *layout.get(RegisterLayout::TERMS);
        s.apply_select(&h, &reg, layout.system(), None).unwrap();
        s.apply_select(&h, &reg, layout.system(), None).unwrap();
        // (−i e^{iπ/2} P)² = (P)² = I
        let out = s.system_branch(layout.system());
        for (a, b) in out.iter().zip(&psi) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn controlled_select_acts_on_one_branch() {
        let h = Hamiltonian::from_real(1, [("X".parse().unwrap(), 1.0)]).unwrap();
        let layout = RegisterLayout::shallow(1, 1, 1).unwrap();
        let amps = vec![
            c(FRAC_1_SQRT_2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(FRAC_1_SQRT_2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ];
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        s.apply_select(&h, layout.get(RegisterLayout::TERMS), layout.system(), Some(2)).unwrap();
        assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitudes()[5] - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn measurement_examples() {
        let layout = RegisterLayout::shallow(0, 1, 1).unwrap();
        let reg = *layout.get(RegisterLayout::TERMS);
        let mut rng = ChaCha8Rng::seed_from_u64(1);

        let mut s = StateVector::init(&layout, &[c(0.6, 0.0), c(0.8, 0.0)]).unwrap();
        let before = s.clone();
        assert_eq!(s.measure_register(&reg, &mut rng).unwrap(), 0);
        assert_eq!(s, before);

        // Bell pair across ℓ and system
        let bell = vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(FRAC_1_SQRT_2, 0.0)];
        let mut ones = 0u32;
        let draws = 10_000;
        for _ in 0..draws {
            let mut s = StateVector::from_amplitudes(bell.clone()).unwrap();
            let v = s.measure_register(&reg, &mut rng).unwrap();
            ones += v as u32;
            let expected = if v == 0 { 0 } else { 3 };
            assert!((s.amplitudes()[expected].re - 1.0).abs() < 1e-12);
        }
        let f = ones as f64 / draws as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25 / draws as f64).sqrt());
    }

    #[test]
    fn projection_arithmetic() {
        // zero branch amplitude √0.36 spread over the system, rest on ℓ = 1
        let layout = RegisterLayout::shallow(0, 1, 1).unwrap();
        let reg = *layout.get(RegisterLayout::TERMS);
        let amps = vec![c(0.36f64.sqrt() * 0.6, 0.0), c(0.0, 0.36f64.sqrt() * 0.8), c(0.8, 0.0), c(0.0, 0.0)];
        let mut s = StateVector::from_amplitudes(amps).unwrap();
        let probs = s.register_probabilities(&reg);
        assert!((probs[0] - 0.36).abs() < 1e-14);
        let p = s.project_register(&reg, 0).unwrap();
        assert!((p - 0.36).abs() < 1e-14);
        assert!((s.amplitudes()[0] - c(0.6, 0.0)).norm() < 1e-12);
        assert!((s.amplitudes()[1] - c(0.0, 0.8)).norm() < 1e-12);
        assert!(s.amplitudes()[2].norm() == 0.0);
    }

    #[test]
    fn degenerate_projection() {
        let layout = RegisterLayout::shallow(0, 1, 1).unwrap();
        let reg = *layout.get(RegisterLayout::TERMS);
        let mut s = StateVector::init(&layout, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(s.project_register(&reg, 1), Err(Error::MeasurementDegenerate { .. })));
    }

    #[test]
    fn layout_widths() {
        let l = RegisterLayout::shallow(3, 3, 4).unwrap();
        assert_eq!(l.total(), 10);
        let u = RegisterLayout::unary(3, 3, 4).unwrap();
        assert_eq!(u.total(), 16);
        assert_eq!(u.term_ids().len(), 3);
        let wide = RegisterLayout::unary(7, 3, 4).unwrap();
        assert_eq!(wide.total(), 32);
        assert!(matches!(StateVector::init(&wide, &[c(1.0, 0.0); 16]), Err(Error::Normalization { .. })));
        let mut psi = vec![c(0.0, 0.0); 16];
        psi[0] = c(1.0, 0.0);
        assert!(matches!(StateVector::init(&wide, &psi), Err(Error::ResourceLimit { .. })));
        assert!(RegisterLayout::unary(20, 3, 4).is_err());
    }

    #[test]
    fn gate_primitives() {
        let mut s = StateVector::from_amplitudes(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let h = FRAC_1_SQRT_2;
        s.apply_single_qubit(0, &[[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]]);
        s.apply_cnot(0, 1);
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15);
        assert!((s.amplitudes()[3].re - h).abs() < 1e-15);
    }
}
