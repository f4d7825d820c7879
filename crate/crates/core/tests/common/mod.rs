#![allow(dead_code)]

use std::collections::HashSet;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use taylor_lcu::bliss::FermionicOperator;
use taylor_lcu::statevector::normalized;
use taylor_lcu::{c64, Hamiltonian, PauliString};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `terms` distinct random Pauli strings on `n` qubits with random complex coefficients.
pub fn random_hamiltonian(n: usize, terms: usize, rng: &mut ChaCha8Rng) -> Arc<Hamiltonian> {
    assert!(terms as u64 <= 4u64.pow(n as u32));
    let letters = ['I', 'X', 'Y', 'Z'];
    let mut seen = HashSet::new();
    let mut raw = Vec::new();
    while raw.len() < terms {
        let s: String = (0..n).map(|_| letters[rng.random_range(0..4)]).collect();
        if seen.insert(s.clone()) {
            let c = c64::from_polar(rng.random_range(0.1..1.0), rng.random_range(-3.1..3.1));
            raw.push((s.parse::<PauliString>().unwrap(), c));
        }
    }
    Arc::new(Hamiltonian::canonicalize(n, raw).unwrap())
}

/// Same, with real coefficients (Hermitian).
pub fn random_hermitian(n: usize, terms: usize, rng: &mut ChaCha8Rng) -> Arc<Hamiltonian> {
    let h = random_hamiltonian(n, terms, rng);
    let raw: Vec<(PauliString, f64)> = h
        .terms()
        .iter()
        .map(|t| (t.letters, if rng.random::<bool>() { t.weight } else { -t.weight }))
        .collect();
    Arc::new(Hamiltonian::from_real(n, raw).unwrap())
}

pub fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Vec<c64> {
    let v: Vec<c64> = (0..1 << n)
        .map(|_| c64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalized(&v)
}

pub fn zero_state(n: usize) -> Vec<c64> {
    let mut v = vec![c64::new(0.0, 0.0); 1 << n];
    v[0] = c64::new(1.0, 0.0);
    v
}

/// `a_j` on the occupation-number basis: bit `j` of the index is orbital `j`,
/// with sign `(−1)^{# occupied orbitals below j}`.
pub fn fock_annihilation(n: usize, j: usize) -> DMatrix<c64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        if x >> j & 1 == 1 {
            let sign = if (x & ((1 << j) - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            m[(x ^ (1 << j), x)] = c64::new(sign, 0.0);
        }
    }
    m
}

/// Dense matrix of `constant + Σ h_ij a_i†a_j + Σ g_ijkl a_i†a_j a_k†a_l` built from
/// occupation-number ladder matrices.
pub fn fock_matrix(f: &FermionicOperator) -> DMatrix<c64> {
    let n = f.n_orb;
    let dim = 1usize << n;
    let a: Vec<DMatrix<c64>> = (0..n).map(|j| fock_annihilation(n, j)).collect();
    let e: Vec<Vec<DMatrix<c64>>> = (0..n).map(|i| (0..n).map(|j| a[i].adjoint() * &a[j]).collect()).collect();
    let mut m = DMatrix::<c64>::identity(dim, dim) * c64::new(f.constant, 0.0);
    for i in 0..n {
        for j in 0..n {
            let c = f.one_body[(i, j)];
            if c.norm() > 0.0 {
                m += &e[i][j] * c;
            }
        }
    }
    if let Some(g) = &f.two_body {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let c = g[((i * n + j) * n + k) * n + l];
                        if c.norm() > 0.0 {
                            m += &e[i][j] * &e[k][l] * c;
                        }
                    }
                }
            }
        }
    }
    m
}

pub fn max_abs_diff(a: &DMatrix<c64>, b: &DMatrix<c64>) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}
