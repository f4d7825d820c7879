//! Sampled vs analytic success probability of the shallow Taylor circuit on
//! a transverse-field Ising chain, for K = 1, 3, 7.

use std::sync::Arc;

use taylor_lcu::{build_w_tilde, c64, oracle, run_shots, CostModel, Hamiltonian};

fn main() -> taylor_lcu::Result<()> {
    let h = Arc::new(Hamiltonian::ising(4, 1.0, 0.5)?);
    let tau = 0.05;
    let mut psi = vec![c64::new(0.0, 0.0); 16];
    psi[0] = c64::new(1.0, 0.0);

    println!("‖α‖₁ = {}, plateau e^(-2τ‖α‖₁) = {:.6}", h.l1_norm(), (-2.0 * tau * h.l1_norm()).exp());
    println!("{:>3} {:>5} {:>9} {:>9} {:>9}", "K", "kappa", "p_hat", "stderr", "exact");
    for kappa in 1..=3 {
        let plan = build_w_tilde(h.clone(), tau, kappa)?;
        let stats = run_shots(&plan, &psi, 20_000, 7, &CostModel::default())?;
        let (p, se) = stats.estimate();
        let exact = oracle::success_prob_wtilde(&h, &psi, tau, plan.order())?;
        println!("{:>3} {kappa:>5} {p:>9.5} {se:>9.5} {exact:>9.5}", plan.order());
    }
    Ok(())
}
