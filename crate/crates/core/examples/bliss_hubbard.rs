//! Shrinking the Pauli 1-norm of a Hubbard chain by subtracting multiples of
//! (N̂ − N_e), which leaves the N_e-electron spectrum untouched.

use taylor_lcu::bliss::{self, optimize_bliss_with, BlissOptions, FermionicOperator, ShiftFamily};

fn main() -> taylor_lcu::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/hubbard4.fcidump");
    let (f, ne) = FermionicOperator::load_integrals(path)?;
    let h = f.jordan_wigner()?;
    println!("{} spin orbitals, {ne} electrons, {} Pauli terms, ‖α‖₁ = {:.4}", f.n_orb, h.len(), h.l1_norm());

    for family in [ShiftFamily::Scalar, ShiftFamily::Diagonal, ShiftFamily::Full] {
        let out = optimize_bliss_with(&f, ne, &BlissOptions { family, ..BlissOptions::default() })?;
        let terms = out.hamiltonian.as_ref().map_or(0, |h| h.len());
        println!(
            "{family:?}: ‖α‖₁ {:.4} → {:.4}, {terms} terms, ξ0 = {:.4}, {} sweeps",
            out.initial_norm, out.final_norm, out.params.xi0, out.sweeps
        );
    }

    let out = bliss::optimize_bliss(&f, ne)?;
    let shifted = bliss::apply_bliss(&f, &out.params)?;
    let before = bliss::fermionic_sector_spectrum(&f, ne)?;
    let after = bliss::fermionic_sector_spectrum(&shifted, ne)?;
    let drift = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("ground energy in the sector {:.6}, max spectral drift {drift:.1e}", before[0]);
    Ok(())
}
