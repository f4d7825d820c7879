//! Qubit and gate counts of both circuit families after compiling to
//! one-qubit gates and CNOTs.

use std::sync::Arc;

use taylor_lcu::resources::{compile, resource_row};
use taylor_lcu::{build_w_unary, Hamiltonian};
use taylor_lcu::circuits::build_w_tilde_order;

fn main() -> taylor_lcu::Result<()> {
    let h = Arc::new(Hamiltonian::ising(4, 1.0, 0.5)?);
    println!("{:>7} {:>2} {:>6} {:>7} {:>10} {:>13}", "family", "K", "qubits", "1q", "cnot", "measurements");
    for k in 1..=7 {
        for plan in [build_w_tilde_order(h.clone(), 0.05, k)?, build_w_unary(h.clone(), 0.05, k)?] {
            let row = resource_row(&plan)?;
            let counts = compile(&plan)?.counts();
            println!(
                "{:>7} {k:>2} {:>6} {:>7} {:>10} {:>13}",
                row.family, row.qubits, counts.one_qubit, row.two_qubit, row.measurements
            );
        }
    }
    Ok(())
}
