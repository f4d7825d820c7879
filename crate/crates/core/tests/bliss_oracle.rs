mod common;

use nalgebra::DMatrix;
use rand::Rng;
use taylor_lcu::bliss::{apply_bliss, lowest_occupation_state, optimize_bliss_with, BlissOptions, BlissParams, FermionicOperator, ShiftFamily};
use taylor_lcu::c64;

use common::*;

#[test]
fn hubbard_encoding_matches_fock_space() {
    let f = FermionicOperator::hubbard_chain(3, 1.0, 4.0).unwrap();
    let h = f.jordan_wigner().unwrap().to_matrix().unwrap();
    assert!(max_abs_diff(&h, &fock_matrix(&f)) < 1e-10);
}

fn random_operator(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> FermionicOperator {
    let mut f = FermionicOperator::zero(n);
    f.constant = rng.random_range(-1.0..1.0);
    let a = DMatrix::from_fn(n, n, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    f.one_body = &a + a.adjoint();
    let mut g = vec![c64::new(0.0, 0.0); n.pow(4)];
    let idx = |i: usize, j: usize, k: usize, l: usize| ((i * n + j) * n + k) * n + l;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let c = c64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
                    g[idx(i, j, k, l)] += c;
                    g[idx(l, k, j, i)] += c.conj();
                }
            }
        }
    }
    f.two_body = Some(g);
    f
}

#[test]
fn shift_matches_dense_definition() {
    let mut rng = rng(31);
    let n = 2;
    for ne in 0..=n {
        let f = random_operator(n, &mut rng);
        let v: Vec<f64> = (0..1 + n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = BlissParams::from_vector(n, ne, &v);
        let shifted = fock_matrix(&apply_bliss(&f, &p).unwrap());

        let a: Vec<DMatrix<c64>> = (0..n).map(|j| fock_annihilation(n, j)).collect();
        let dim = 1 << n;
        let id = DMatrix::<c64>::identity(dim, dim);
        let number = (0..n).fold(DMatrix::zeros(dim, dim), |acc, j| acc + a[j].adjoint() * &a[j]);
        let mut t = &id * c64::new(p.xi0, 0.0);
        for i in 0..n {
            for j in 0..n {
                t += a[i].adjoint() * &a[j] * p.xi[(i, j)];
            }
        }
        let expected = fock_matrix(&f) - t * (number - id * c64::new(ne as f64, 0.0));
        assert!(max_abs_diff(&shifted, &expected) < 1e-12, "N_e = {ne}");
    }
}

#[test]
fn optimizer_never_worsens_random_operators() {
    let mut rng = rng(32);
    for family in [ShiftFamily::Scalar, ShiftFamily::Diagonal, ShiftFamily::Full] {
        let f = random_operator(3, &mut rng);
        let opts = BlissOptions { family, ..BlissOptions::default() };
        let out = optimize_bliss_with(&f, 1, &opts).unwrap();
        assert!(out.final_norm <= out.initial_norm + 1e-12);
        let before = taylor_lcu::bliss::fermionic_sector_spectrum(&f, 1).unwrap();
        let after = taylor_lcu::bliss::fermionic_sector_spectrum(&apply_bliss(&f, &out.params).unwrap(), 1).unwrap();
        for (x, y) in before.iter().zip(&after) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}

#[test]
fn lowest_occupation_state_has_right_weight() {
    let psi = lowest_occupation_state(6, 3);
    let idx = psi.iter().position(|a| a.norm() > 0.5).unwrap();
    assert_eq!(idx.count_ones(), 3);
}
