//! Hamiltonians as linear combinations of phased Pauli strings.
//!
//! Every term carries a nonnegative weight and a phase, so
//! `H = Σ_ℓ weight_ℓ · e^{i·phase_ℓ} · P_ℓ`. Signed or complex input
//! coefficients are folded into this form by [`Hamiltonian::canonicalize`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64 as c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString, MAX_QUBITS};

/// Default qubit cap for dense matrix exports.
pub const DENSE_CAP: usize = 12;

/// Merged coefficients at or below this magnitude are dropped.
pub const ZERO_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub weight: f64,
    /// Radians.
    pub phase: f64,
    pub letters: PauliString,
}

impl PauliTerm {
    pub fn coefficient(&self) -> c64 {
        c64::from_polar(self.weight, self.phase)
    }
}

/// Weighted Pauli-string Hamiltonian with nonnegative weights and unique strings.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl Hamiltonian {
    /// Builds a Hamiltonian from raw complex coefficients.
    ///
    /// Duplicate strings are summed (first occurrence fixes the order), then
    /// each coefficient `c` is stored as `weight = |c|`, `phase = arg(c)`.
    pub fn canonicalize<I>(n: usize, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, c64)>,
    {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidHamiltonian(format!("qubit count {n} out of range 1..=64")));
        }
        let mut index: HashMap<PauliString, usize> = HashMap::new();
        let mut merged: Vec<(PauliString, c64)> = Vec::new();
        for (letters, c) in raw {
            if letters.len() != n {
                return Err(Error::InvalidHamiltonian(format!(
                    "term {letters} has length {}, expected {n}",
                    letters.len()
                )));
            }
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::InvalidHamiltonian(format!("non-finite coefficient on {letters}")));
            }
            match index.get(&letters) {
                Some(&i) => merged[i].1 += c,
                None => {
                    index.insert(letters, merged.len());
                    merged.push((letters, c));
                }
            }
        }
        let terms: Vec<PauliTerm> = merged
            .into_iter()
            .filter(|(_, c)| c.norm() > ZERO_TOL)
            .map(|(letters, c)| PauliTerm {
                weight: c.norm(),
                phase: canonical_phase(c),
                letters,
            })
            .collect();
        if terms.is_empty() {
            return Err(Error::InvalidHamiltonian("all coefficients are zero".into()));
        }
        Ok(Hamiltonian { n, terms })
    }

    /// Real signed coefficients, e.g. straight from a model definition.
    pub fn from_real<I>(n: usize, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, f64)>,
    {
        Self::canonicalize(n, raw.into_iter().map(|(p, c)| (p, c64::new(c, 0.0))))
    }

    pub fn from_terms(n: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if terms.iter().any(|t| t.weight < 0.0) {
            return Err(Error::InvalidHamiltonian("negative weight; fold signs into the phase".into()));
        }
        Self::canonicalize(n, terms.into_iter().map(|t| (t.letters, t.coefficient())))
    }

    /// Open-chain transverse-field Ising model
    /// `J Σ_{i<n-1} Z_i Z_{i+1} + h Σ_i X_i`.
    ///
    /// Couplings come first in site order, then fields in site order.
    pub fn ising(n_sites: usize, j: f64, h: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidModel(format!("Ising chain needs at least 2 sites, got {n_sites}")));
        }
        if n_sites > MAX_QUBITS {
            return Err(Error::InvalidModel(format!("Ising chain of {n_sites} sites exceeds 64")));
        }
        let mut raw = Vec::with_capacity(2 * n_sites - 1);
        for i in 0..n_sites - 1 {
            let mut s = PauliString::identity(n_sites);
            s.set(i, Pauli::Z);
            s.set(i + 1, Pauli::Z);
            raw.push((s, j));
        }
        for i in 0..n_sites {
            raw.push((PauliString::single(n_sites, i, Pauli::X), h));
        }
        Self::from_real(n_sites, raw).map_err(|e| match e {
            Error::InvalidHamiltonian(m) => Error::InvalidModel(m),
            other => other,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Number of terms `L`.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// `⌈log₂ L⌉`, at least one qubit.
    pub fn select_width(&self) -> usize {
        ceil_log2(self.terms.len()).max(1)
    }

    /// PREPARE amplitudes `√(weight_ℓ / ‖α‖₁)` padded with zeros to `2^width`.
    pub fn prepare_amplitudes(&self, width: usize) -> Result<Vec<c64>> {
        if (1usize << width) < self.terms.len() {
            return Err(Error::LayoutMismatch(format!(
                "{} terms do not fit a {width}-qubit register",
                self.terms.len()
            )));
        }
        let norm = self.l1_norm();
        let mut amps = vec![c64::new(0.0, 0.0); 1 << width];
        for (a, t) in amps.iter_mut().zip(&self.terms) {
            *a = c64::new((t.weight / norm).sqrt(), 0.0);
        }
        Ok(amps)
    }

    pub fn to_matrix(&self) -> Result<DMatrix<c64>> {
        self.to_matrix_capped(DENSE_CAP)
    }

    pub fn to_matrix_capped(&self, cap: usize) -> Result<DMatrix<c64>> {
        if self.n > cap {
            return Err(Error::ResourceLimit {
                what: "dense Hamiltonian matrix",
                qubits: self.n,
                cap,
            });
        }
        let dim = 1usize << self.n;
        let mut m = DMatrix::<c64>::zeros(dim, dim);
        for t in &self.terms {
            let c = t.coefficient();
            for col in 0..dim {
                let (row, f) = t.letters.apply_to_basis(col);
                m[(row, col)] += c * f;
            }
        }
        Ok(m)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: HamiltonianFile = serde_json::from_str(s)?;
        file.into_hamiltonian()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&fs::read_to_string(path)?)
    }

    pub fn to_file(&self) -> HamiltonianFile {
        HamiltonianFile {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| TermRecord {
                    coeff: t.weight,
                    phase: t.phase,
                    paulis: t.letters.to_string(),
                })
                .collect(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_file())?;
        fs::write(path, text + "\n")?;
        Ok(())
    }
}

/// `arg(c)` mapped into `(-π, π]`, with exact values for real and imaginary axes.
fn canonical_phase(c: c64) -> f64 {
    if c.im == 0.0 {
        if c.re < 0.0 {
            PI
        } else {
            0.0
        }
    } else if c.re == 0.0 {
        if c.im > 0.0 {
            PI / 2.0
        } else {
            -PI / 2.0
        }
    } else {
        c.arg()
    }
}

pub fn ceil_log2(x: usize) -> usize {
    if x <= 1 {
        0
    } else {
        (usize::BITS - (x - 1).leading_zeros()) as usize
    }
}

/// On-disk Hamiltonian: `{"n": 2, "terms": [{"coeff": 1.0, "phase": 0.0, "paulis": "ZZ"}]}`.
///
/// Character `j` of `paulis` acts on qubit `j`. `phase` is optional.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HamiltonianFile {
    pub n: usize,
    pub terms: Vec<TermRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TermRecord {
    pub coeff: f64,
    #[serde(default)]
    pub phase: f64,
    pub paulis: String,
}

impl HamiltonianFile {
    pub fn into_hamiltonian(self) -> Result<Hamiltonian> {
        let n = self.n;
        let raw = self
            .terms
            .into_iter()
            .map(|t| {
                let p: PauliString = t.paulis.parse()?;
                Ok((p, c64::from_polar(t.coeff, t.phase)))
            })
            .collect::<Result<Vec<_>>>()?;
        Hamiltonian::canonicalize(n, raw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn ising_four_sites() {
        let h = Hamiltonian::ising(4, 1.0, 0.5).unwrap();
        assert_eq!(h.len(), 7);
        assert!((h.l1_norm() - 5.0).abs() < 1e-14);
        assert_eq!(h.terms()[0].letters.to_string(), "ZZII");
        assert_eq!(h.terms()[2].letters.to_string(), "IIZZ");
        assert_eq!(h.terms()[3].letters.to_string(), "XIII");
        assert_eq!(h.select_width(), 3);
    }

    #[test]
    fn ising_edge_cases() {
        let h = Hamiltonian::ising(2, 1.0, 0.0).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].letters.to_string(), "ZZ");
        assert_eq!(h.terms()[0].weight, 1.0);
        assert_eq!(h.terms()[0].phase, 0.0);

        let h = Hamiltonian::ising(3, 0.0, 0.5).unwrap();
        assert_eq!(h.len(), 3);
        assert!(h.terms().iter().all(|t| t.letters.x_mask().count_ones() == 1));
        assert!((h.l1_norm() - 1.5).abs() < 1e-14);

        assert!(matches!(Hamiltonian::ising(1, 1.0, 1.0), Err(Error::InvalidModel(_))));
        assert!(matches!(Hamiltonian::ising(3, 0.0, 0.0), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn canonicalize_signs_and_duplicates() {
        let h = Hamiltonian::from_real(1, [(ps("X"), -0.5)]).unwrap();
        assert_eq!(h.terms()[0].weight, 0.5);
        assert_eq!(h.terms()[0].phase, PI);

        let h = Hamiltonian::from_real(1, [(ps("Z"), 1.0), (ps("Z"), 1.0)]).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.terms()[0].weight, 2.0);

        let h = Hamiltonian::canonicalize(2, [(ps("IY"), c64::new(0.0, 0.3))]).unwrap();
        assert!((h.terms()[0].weight - 0.3).abs() < 1e-15);
        assert_eq!(h.terms()[0].phase, PI / 2.0);

        assert!(Hamiltonian::from_real(1, [(ps("Z"), 1.0), (ps("Z"), -1.0)]).is_err());
        assert!(Hamiltonian::from_real(1, [(ps("ZZ"), 1.0)]).is_err());
    }

    #[test]
    fn single_term_norm() {
        let h = Hamiltonian::from_real(2, [(ps("XY"), 2.5)]).unwrap();
        assert_eq!(h.l1_norm(), 2.5);
    }

    #[test]
    fn matrix_examples() {
        let z = Hamiltonian::from_real(1, [(ps("Z"), 1.0)]).unwrap().to_matrix().unwrap();
        assert!((z[(0, 0)] - 1.0).norm() < 1e-15);
        assert!((z[(1, 1)] + 1.0).norm() < 1e-15);
        assert!(z[(0, 1)].norm() < 1e-15);

        let mx = Hamiltonian::from_real(1, [(ps("X"), -1.0)]).unwrap().to_matrix().unwrap();
        assert!((mx[(0, 1)] + 1.0).norm() < 1e-15);
        assert!((mx[(1, 0)] + 1.0).norm() < 1e-15);
        assert!(mx[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn two_site_ising_spectrum() {
        // Z0Z1 + 0.5(X0 + X1) on |00>+|11>, |01>+|10> is [[1, 1], [1, -1]];
        // |00>-|11> and |01>-|10> are eigenvectors with 1 and -1.
        let h = Hamiltonian::ising(2, 1.0, 0.5).unwrap();
        let m = h.to_matrix().unwrap();
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let r = (1.0f64 + 1.0).sqrt();
        let mut expected = vec![-r, r, -1.0, 1.0];
        expected.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12, "{ev:?} vs {expected:?}");
        }
    }

    #[test]
    fn dense_cap() {
        let h = Hamiltonian::ising(13, 1.0, 1.0).unwrap();
        assert!(matches!(h.to_matrix(), Err(Error::ResourceLimit { .. })));
    }

    #[test]
    fn file_round_trip() {
        let text = r#"{"n": 2, "terms": [
            {"coeff": -1.0, "paulis": "ZZ"},
            {"coeff": 0.5, "phase": 0.0, "paulis": "XI"},
            {"coeff": 0.25, "paulis": "ZZ"}
        ]}"#;
        let h = Hamiltonian::from_json_str(text).unwrap();
        assert_eq!(h.len(), 2);
        assert!((h.terms()[0].weight - 0.75).abs() < 1e-15);
        assert_eq!(h.terms()[0].phase, PI);
        let back = h.to_file().into_hamiltonian().unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(7), 3);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
    }

    #[test]
    fn padded_prepare_amplitudes() {
        let h = Hamiltonian::ising(4, 1.0, 0.5).unwrap();
        let a = h.prepare_amplitudes(3).unwrap();
        let want = [0.2, 0.2, 0.2, 0.1, 0.1, 0.1, 0.1, 0.0];
        for (x, w) in a.iter().zip(want) {
            assert!((x.re - f64::sqrt(w)).abs() < 1e-15 && x.im == 0.0);
        }
        assert!(h.prepare_amplitudes(2).is_err());
    }
}
