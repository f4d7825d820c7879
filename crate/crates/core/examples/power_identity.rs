//! Applying U controlled on bit i of a κ-qubit register 2^i times builds
//! Σ_k |k⟩⟨k| ⊗ U^k.

use taylor_lcu::c64;
use taylor_lcu::circuits::power_schedule;
use taylor_lcu::statevector::StateVector;

fn main() -> taylor_lcu::Result<()> {
    let kappa = 3;
    let theta: f64 = 0.3;
    let u = [
        [c64::new(theta.cos(), 0.0), c64::new(-theta.sin(), 0.0)],
        [c64::new(theta.sin(), 0.0), c64::new(theta.cos(), 0.0)],
    ];
    println!("repetitions per control bit: {:?}", power_schedule(kappa));
    for k in 0..1usize << kappa {
        // target is qubit 0, register bit i is qubit 1 + i
        let mut amps = vec![c64::new(0.0, 0.0); 1 << (kappa + 1)];
        amps[k << 1] = c64::new(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(amps)?;
        for (i, reps) in power_schedule(kappa).into_iter().enumerate() {
            for _ in 0..reps {
                s.apply_controlled_single_qubit(1 + i, 0, &u);
            }
        }
        let a = s.amplitudes();
        let angle = a[(k << 1) | 1].re.atan2(a[k << 1].re);
        println!("k={k}: rotation angle {angle:+.4} (expected {:+.4})", k as f64 * theta);
    }
    Ok(())
}
