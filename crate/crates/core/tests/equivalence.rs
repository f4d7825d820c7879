mod common;

use rand::Rng;
use taylor_lcu::circuits::{build_w_hk, build_w_tilde, build_w_unary, defer_measurements};
use taylor_lcu::resources::compile;
use taylor_lcu::sampler::exact_chain;
use taylor_lcu::statevector::fidelity;
use taylor_lcu::oracle;

use common::*;

#[test]
fn deferred_projection_matches_sequential_chain() {
    let mut rng = rng(21);
    for n in 1..=3 {
        for kappa in 1..=2 {
            let h = random_hamiltonian(n, rng.random_range(1..=4), &mut rng);
            let psi = random_state(n, &mut rng);
            let tau = rng.random_range(0.1..0.8);
            for plan in [build_w_tilde(h.clone(), tau, kappa).unwrap(), build_w_hk(h.clone(), kappa + 1).unwrap()] {
                let sequential = exact_chain(&plan, &psi).unwrap();
                let deferred = exact_chain(&defer_measurements(&plan).unwrap(), &psi).unwrap();
                assert!((sequential.success_probability - deferred.success_probability).abs() < 1e-10);
                let chained: f64 = sequential.step_probabilities.iter().product();
                assert!((chained - sequential.success_probability).abs() < 1e-12);
                let f = fidelity(sequential.output.as_ref().unwrap(), deferred.output.as_ref().unwrap());
                assert!(1.0 - f < 1e-9);
            }
        }
    }
}

#[test]
fn unary_projection_matches_taylor_success() {
    let mut rng = rng(22);
    for n in 1..=3 {
        for order in 1..=5 {
            let h = random_hamiltonian(n, rng.random_range(1..=4), &mut rng);
            let psi = random_state(n, &mut rng);
            let tau = rng.random_range(0.1..1.0);
            let run = exact_chain(&build_w_unary(h.clone(), tau, order).unwrap(), &psi).unwrap();
            let p = oracle::success_prob_wtilde(&h, &psi, tau, order).unwrap();
            assert!((run.success_probability - p).abs() < 1e-10, "n={n} K={order}");
        }
    }
}

#[test]
fn compiled_gates_reproduce_plan() {
    let mut rng = rng(23);
    for n in 1..=2 {
        let h = random_hamiltonian(n, 3, &mut rng);
        let psi = random_state(n, &mut rng);
        for plan in [
            build_w_tilde(h.clone(), 0.3, 2).unwrap(),
            build_w_unary(h.clone(), 0.3, 2).unwrap(),
            build_w_hk(h.clone(), 2).unwrap(),
        ] {
            let exact = exact_chain(&plan, &psi).unwrap();
            let (p, out) = compile(&plan).unwrap().post_selected(&plan, &psi).unwrap();
            assert!((p - exact.success_probability).abs() < 1e-10);
            assert!(1.0 - fidelity(&out, exact.output.as_ref().unwrap()) < 1e-9);
        }
    }
}

#[test]
fn zero_time_always_succeeds() {
    let mut rng = rng(24);
    let h = random_hermitian(2, 3, &mut rng);
    let psi = random_state(2, &mut rng);
    let run = exact_chain(&build_w_tilde(h, 0.0, 2).unwrap(), &psi).unwrap();
    assert!((run.success_probability - 1.0).abs() < 1e-12);
    assert!(1.0 - fidelity(run.output.as_ref().unwrap(), &psi) < 1e-12);
}
