//! The mid-measured circuit and the unary deferred-measurement circuit
//! produce the same normalized state as the truncated Taylor series.

use std::sync::Arc;

use taylor_lcu::sampler::exact_chain;
use taylor_lcu::statevector::{fidelity, normalized};
use taylor_lcu::{build_w_tilde, build_w_unary, c64, oracle, Hamiltonian, PauliString};

fn main() -> taylor_lcu::Result<()> {
    let terms = [("XZ", c64::new(0.7, 0.0)), ("YY", c64::new(0.0, -0.4)), ("ZI", c64::new(-0.3, 0.2))];
    let raw = terms.iter().map(|(s, c)| (s.parse::<PauliString>().unwrap(), *c));
    let h = Arc::new(Hamiltonian::canonicalize(2, raw)?);
    let psi = normalized(&[c64::new(1.0, 0.0), c64::new(0.0, 0.5), c64::new(0.3, 0.0), c64::new(0.0, 0.0)]);
    let tau = 0.4;

    for kappa in 1..=2 {
        let shallow = build_w_tilde(h.clone(), tau, kappa)?;
        let unary = build_w_unary(h.clone(), tau, shallow.order())?;
        let a = exact_chain(&shallow, &psi)?;
        let b = exact_chain(&unary, &psi)?;
        let dense = oracle::taylor_output(&h, &psi, tau, shallow.order())?;
        println!(
            "K={}: qubits {} vs {}, p {:.12} vs {:.12}, infidelity vs dense {:.1e} / {:.1e}",
            shallow.order(),
            shallow.qubits(),
            unary.qubits(),
            a.success_probability,
            b.success_probability,
            1.0 - fidelity(a.output.as_ref().unwrap(), &dense),
            1.0 - fidelity(b.output.as_ref().unwrap(), &dense),
        );
    }
    println!("\n{}", build_w_tilde(h, tau, 1)?.dump());
    Ok(())
}
