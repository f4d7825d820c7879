//! Dense reference values for the truncated Taylor LCU: the operator
//! `U_{τ,K}`, success probabilities of `W_{H̃^k}` and `W̃`, average runtimes
//! with and without mid-circuit measurement, and the spectral lower bound.
//!
//! Everything here is plain dense linear algebra on `2^n × 2^n` matrices and
//! is meant as a correctness reference, not a fast path.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as c64;

use crate::circuits::TaylorCoefficients;
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, DENSE_CAP};
use crate::statevector::check_normalized;

pub use crate::statevector::fidelity;

/// `H̃ = (−i/‖α‖₁)·H`.
pub fn rescaled_matrix(h: &Hamiltonian) -> Result<DMatrix<c64>> {
    let m = h.to_matrix_capped(DENSE_CAP)?;
    Ok(m * c64::new(0.0, -1.0 / h.l1_norm()))
}

/// `U_{τ,K} = Σ_{k=0}^{K} β̃_k H̃^k`.
pub fn truncated_taylor_matrix(h: &Hamiltonian, tau: f64, order: usize) -> Result<DMatrix<c64>> {
    let taylor = TaylorCoefficients::new(tau, h.l1_norm(), order)?;
    let ht = rescaled_matrix(h)?;
    let dim = ht.nrows();
    let mut power = DMatrix::<c64>::identity(dim, dim);
    let mut u = DMatrix::<c64>::identity(dim, dim);
    for k in 1..=order {
        power = &ht * &power;
        u += &power * c64::new(taylor.beta[k], 0.0);
    }
    Ok(u)
}

/// Smallest-magnitude eigenvalue information of a Hermitian Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralInfo {
    pub lambda0: f64,
}

fn hermitian_matrix(h: &Hamiltonian) -> Result<DMatrix<c64>> {
    let m = h.to_matrix_capped(DENSE_CAP)?;
    let dev = (&m - m.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    if dev > 1e-10 * h.l1_norm().max(1.0) {
        return Err(Error::InvalidHamiltonian(format!("matrix is not Hermitian (deviation {dev:e})")));
    }
    Ok(m)
}

pub fn eigenvalues(h: &Hamiltonian) -> Result<Vec<f64>> {
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_matrix(h)?).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// `λ0`: eigenvalue of least magnitude, ties resolved toward the nonnegative one.
pub fn spectral_info(h: &Hamiltonian) -> Result<SpectralInfo> {
    let ev = eigenvalues(h)?;
    let lambda0 = ev
        .into_iter()
        .min_by(|a, b| a.abs().total_cmp(&b.abs()).then(b.total_cmp(a)))
        .expect("nonempty spectrum");
    Ok(SpectralInfo { lambda0 })
}

/// `(λ0/‖α‖₁)^{2k}`.
pub fn spectral_lower_bound(h: &Hamiltonian, k: usize) -> Result<f64> {
    let info = spectral_info(h)?;
    Ok((info.lambda0 / h.l1_norm()).abs().powi(2 * k as i32))
}

/// `exp(−iHτ)` by diagonalization.
pub fn exact_propagator(h: &Hamiltonian, tau: f64) -> Result<DMatrix<c64>> {
    let eig = SymmetricEigen::new(hermitian_matrix(h)?);
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| c64::from_polar(1.0, -l * tau)));
    Ok(v * phases * v.adjoint())
}

fn as_vector(psi: &[c64], dim: usize) -> Result<DVector<c64>> {
    if psi.len() != dim {
        return Err(Error::LayoutMismatch(format!("state has {} amplitudes, expected {dim}", psi.len())));
    }
    check_normalized(psi)?;
    Ok(DVector::from_column_slice(psi))
}

/// `⟨ψ|(H̃^k)† H̃^k|ψ⟩`.
pub fn success_prob_hk(h: &Hamiltonian, psi: &[c64], k: usize) -> Result<f64> {
    let ht = rescaled_matrix(h)?;
    let mut v = as_vector(psi, ht.nrows())?;
    for _ in 0..k {
        v = &ht * v;
    }
    Ok(v.norm_squared())
}

/// Conditional probabilities `p_i = ⟨ψ_{i−1}|H̃†H̃|ψ_{i−1}⟩` with normalized
/// `ψ_i ∝ H̃ψ_{i−1}`. Stops early (with a trailing 0) on a dead branch.
pub fn chain_probabilities(h: &Hamiltonian, psi: &[c64], k: usize) -> Result<Vec<f64>> {
    let ht = rescaled_matrix(h)?;
    let mut v = as_vector(psi, ht.nrows())?;
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let w = &ht * &v;
        let p = w.norm_squared();
        out.push(p);
        if p == 0.0 {
            break;
        }
        v = w / c64::new(p.sqrt(), 0.0);
    }
    Ok(out)
}

/// `p_W̃ = ⟨ψ|U†U|ψ⟩ / ‖β̃‖₁²`.
pub fn success_prob_wtilde(h: &Hamiltonian, psi: &[c64], tau: f64, order: usize) -> Result<f64> {
    let u = truncated_taylor_matrix(h, tau, order)?;
    let v = as_vector(psi, u.nrows())?;
    let beta_norm = TaylorCoefficients::new(tau, h.l1_norm(), order)?.beta_norm;
    Ok((u * v).norm_squared() / (beta_norm * beta_norm))
}

/// Normalized post-selected output `U_{τ,K}ψ / ‖U_{τ,K}ψ‖`.
pub fn taylor_output(h: &Hamiltonian, psi: &[c64], tau: f64, order: usize) -> Result<Vec<c64>> {
    let u = truncated_taylor_matrix(h, tau, order)?;
    let w = u * as_vector(psi, 1usize << h.n_qubits())?;
    let n = w.norm();
    Ok(w.iter().map(|x| x / n).collect())
}

fn check_chain(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidArgument("empty probability chain".into()));
    }
    if let Some(bad) = p.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::InvalidArgument(format!("probability {bad} outside [0, 1]")));
    }
    Ok(())
}

/// Mean cost of one shot of `W_{H̃^k}` with abort on the first failed block:
/// `Σ_{j<k} (1−p_j)(Π_{i<j} p_i)·j·d + (Π_{i<k} p_i)·k·d`.
pub fn expected_runtime_midmeasure(p: &[f64], d: f64) -> Result<f64> {
    check_chain(p)?;
    let k = p.len();
    let mut reach = 1.0;
    let mut total = 0.0;
    for (j, pj) in p.iter().enumerate().take(k - 1) {
        total += (1.0 - pj) * reach * (j + 1) as f64 * d;
        reach *= pj;
    }
    Ok(total + reach * k as f64 * d)
}

/// Total cost of one success with mid-circuit measurement:
/// `d(1 + p₁ + p₁p₂ + … + p₁…p_{k−1}) / (p₁…p_k)`; infinite if some `p_i = 0`.
pub fn total_runtime_success(p: &[f64], d: f64) -> Result<f64> {
    check_chain(p)?;
    let mut reach = 1.0;
    let mut numer = 0.0;
    for pi in p {
        numer += reach;
        reach *= pi;
    }
    if reach == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(d * numer / reach)
}

/// Deferred-measurement counterpart `k·d / (p₁…p_k)`.
pub fn total_runtime_deferred(p: &[f64], d: f64) -> Result<f64> {
    check_chain(p)?;
    let prod: f64 = p.iter().product();
    if prod == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(p.len() as f64 * d / prod)
}

/// First-failure reduction `Σ_{odd k ≤ K} β̃_k/‖β̃‖₁ · (1 − p₁)`.
pub fn first_failure_reduction(h: &Hamiltonian, psi: &[c64], tau: f64, order: usize) -> Result<f64> {
    let taylor = TaylorCoefficients::new(tau, h.l1_norm(), order)?;
    let p1 = success_prob_hk(h, psi, 1)?;
    let odd: f64 = taylor.beta.iter().skip(1).step_by(2).sum();
    Ok(odd / taylor.beta_norm * (1.0 - p1))
}

/// `(K·d̃/p_W̃)·[1 − (τ‖α‖₁/‖β̃‖₁)(1 − p₁)]`, the first-order estimate of the
/// mean total cost per successful `W̃` run.
pub fn runtime_upper_bound(h: &Hamiltonian, psi: &[c64], tau: f64, order: usize, d_ctrl: f64) -> Result<f64> {
    let taylor = TaylorCoefficients::new(tau, h.l1_norm(), order)?;
    let p_w = success_prob_wtilde(h, psi, tau, order)?;
    let p1 = success_prob_hk(h, psi, 1)?;
    let correction = taylor.rescaled_time() / taylor.beta_norm * (1.0 - p1);
    Ok(order as f64 * d_ctrl / p_w * (1.0 - correction))
}
