//! Cost of repeat-until-success with early aborts, compared with the
//! closed forms and with deferring every measurement to the end.

use std::sync::Arc;

use taylor_lcu::circuits::build_w_hk;
use taylor_lcu::{build_w_tilde, c64, oracle, run_shots, CostModel, Hamiltonian};

fn main() -> taylor_lcu::Result<()> {
    let h = Arc::new(Hamiltonian::ising(4, 1.0, 0.5)?);
    let mut psi = vec![c64::new(0.0, 0.0); 16];
    psi[0] = c64::new(1.0, 0.0);
    let cost = CostModel::default();

    let k = 3;
    let chain = oracle::chain_probabilities(&h, &psi, k)?;
    let stats = run_shots(&build_w_hk(h.clone(), k)?, &psi, 50_000, 1, &cost)?;
    println!("H̃^{k} step probabilities {chain:.4?}");
    println!(
        "  mean cost per shot: sampled {:.4} ± {:.4}, formula {:.4}",
        stats.mean_cost_per_shot(),
        stats.cost_stderr(),
        oracle::expected_runtime_midmeasure(&chain, 1.0)?
    );
    println!(
        "  cost per success: mid-measured {:.4}, deferred {:.4}",
        oracle::total_runtime_success(&chain, 1.0)?,
        oracle::total_runtime_deferred(&chain, 1.0)?
    );

    let plan = build_w_tilde(h.clone(), 0.05, 2)?;
    let stats = run_shots(&plan, &psi, 50_000, 2, &cost)?;
    println!("W̃ (K=3): abort histogram {}", stats.histogram_string());
    println!(
        "  cost per success: sampled {:.4}, first-order estimate {:.4}",
        stats.cost_per_success(),
        oracle::runtime_upper_bound(&h, &psi, 0.05, 3, 1.0)?
    );
    Ok(())
}
