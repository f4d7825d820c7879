//! Second-quantized operators, their Jordan–Wigner encoding, and the
//! particle-number symmetry shift
//!
//! ```text
//! H' = H − (ξ0 + Σ_ij ξ_ij a_i†a_j)(N̂ − N_e)
//! ```
//!
//! which leaves the spectrum inside the `N_e`-electron sector unchanged while
//! changing the Pauli coefficients. [`optimize_bliss`] picks `(ξ0, ξ)` to
//! minimize `‖α‖₁` of the encoded `H'`.
//!
//! Conventions: spin orbital `j` is qubit `j`, `|1⟩` is occupied, and
//! `a_j = Z_0⋯Z_{j−1}·(X_j + iY_j)/2`, so `a_j†a_j = (I − Z_j)/2`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, DENSE_CAP, ZERO_TOL};
use crate::pauli::PauliString;

/// Largest spin-orbital count accepted by the encoder.
pub const ORBITAL_CAP: usize = 12;
/// Largest spin-orbital count for which the two-body part of the shift is optimized.
pub const TWO_BODY_SHIFT_CAP: usize = 8;

const SYM_TOL: f64 = 1e-12;

fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

/// `constant + Σ h_ij E_ij + Σ g_ijkl E_ij E_kl` with `E_ij = a_i†a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FermionicOperator {
    pub n_orb: usize,
    pub constant: f64,
    pub one_body: DMatrix<c64>,
    /// Row-major `N⁴` array indexed `((i·N + j)·N + k)·N + l`.
    pub two_body: Option<Vec<c64>>,
}

impl FermionicOperator {
    pub fn zero(n_orb: usize) -> Self {
        FermionicOperator { n_orb, constant: 0.0, one_body: DMatrix::zeros(n_orb, n_orb), two_body: None }
    }

    /// `N̂ = Σ_i a_i†a_i`.
    pub fn number_operator(n_orb: usize) -> Self {
        let mut f = Self::zero(n_orb);
        f.one_body = DMatrix::identity(n_orb, n_orb);
        f
    }

    /// Open-chain Fermi–Hubbard model on `sites` sites with spin orbital
    /// `2·site + σ`: `−t Σ_{⟨ij⟩σ}(a_iσ†a_jσ + h.c.) + U Σ_i n_i↑n_i↓`.
    pub fn hubbard_chain(sites: usize, t: f64, u: f64) -> Result<Self> {
        if sites == 0 || 2 * sites > ORBITAL_CAP {
            return Err(Error::InvalidModel(format!("Hubbard chain needs 1..={} sites", ORBITAL_CAP / 2)));
        }
        let n = 2 * sites;
        let mut f = Self::zero(n);
        for s in 0..sites - 1 {
            for spin in 0..2 {
                let (a, b) = (2 * s + spin, 2 * (s + 1) + spin);
                f.one_body[(a, b)] = c64::new(-t, 0.0);
                f.one_body[(b, a)] = c64::new(-t, 0.0);
            }
        }
        let mut g = vec![zero(); n.pow(4)];
        for s in 0..sites {
            let (up, dn) = (2 * s, 2 * s + 1);
            g[f.idx(up, up, dn, dn)] = c64::new(u / 2.0, 0.0);
            g[f.idx(dn, dn, up, up)] = c64::new(u / 2.0, 0.0);
        }
        f.two_body = Some(g);
        Ok(f)
    }

    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        let n = self.n_orb;
        ((i * n + j) * n + k) * n + l
    }

    fn two_body_mut(&mut self) -> &mut Vec<c64> {
        let len = self.n_orb.pow(4);
        self.two_body.get_or_insert_with(|| vec![zero(); len])
    }

    /// Checks dimensions and Hermiticity (`h = h†`, `g_ijkl = conj(g_lkji)`).
    pub fn validate(&self) -> Result<()> {
        let n = self.n_orb;
        if n == 0 || n > ORBITAL_CAP {
            return Err(Error::ResourceLimit { what: "fermionic operator", qubits: n, cap: ORBITAL_CAP });
        }
        if self.one_body.shape() != (n, n) {
            return Err(Error::InvalidArgument(format!("one-body matrix must be {n}×{n}")));
        }
        if !self.constant.is_finite() {
            return Err(Error::InvalidArgument("constant term is not finite".into()));
        }
        let h = &self.one_body;
        if (h - h.adjoint()).iter().any(|x| x.norm() > SYM_TOL) {
            return Err(Error::InvalidArgument("one-body matrix is not Hermitian".into()));
        }
        if let Some(g) = &self.two_body {
            if g.len() != n.pow(4) {
                return Err(Error::InvalidArgument(format!("two-body array must hold {} entries", n.pow(4))));
            }
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            if (g[self.idx(i, j, k, l)] - g[self.idx(l, k, j, i)].conj()).norm() > SYM_TOL {
                                return Err(Error::InvalidArgument(format!(
                                    "two-body term ({i},{j},{k},{l}) has no Hermitian partner"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn pauli_sum(&self) -> Result<PauliSum> {
        self.validate()?;
        let n = self.n_orb;
        let mut sum = PauliSum::scalar(n, c64::new(self.constant, 0.0));
        let hops: Vec<Vec<PauliSum>> = (0..n).map(|i| (0..n).map(|j| excitation(n, i, j)).collect()).collect();
        for i in 0..n {
            for j in 0..n {
                let c = self.one_body[(i, j)];
                if c != zero() {
                    sum.add_scaled(&hops[i][j], c);
                }
            }
        }
        if let Some(g) = &self.two_body {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let c = g[self.idx(i, j, k, l)];
                            if c != zero() {
                                sum.add_scaled(&hops[i][j].mul(&hops[k][l]), c);
                            }
                        }
                    }
                }
            }
        }
        Ok(sum)
    }

    /// Jordan–Wigner encoded Hamiltonian.
    pub fn jordan_wigner(&self) -> Result<Hamiltonian> {
        self.pauli_sum()?.into_hamiltonian()
    }

    /// Reads the integral file format: a header carrying `NORB=<N>` and
    /// `NELEC=<Ne>`, then lines `value i j k l` with 1-based spin-orbital
    /// indices. `k = l = 0` marks a one-body entry `h_ij`, all-zero indices
    /// the constant, anything else a chemist-notation integral `(ij|kl)`;
    /// symmetric images are filled in (real orbitals, eightfold symmetry).
    /// The operator is `const + Σ h_ij a_i†a_j + ½ Σ (ij|kl) a_i†a_k†a_l a_j`.
    pub fn from_integral_str(text: &str) -> Result<(Self, usize)> {
        let mut norb = None;
        let mut nelec = None;
        let mut lines = text.lines().enumerate().peekable();
        while let Some((no, line)) = lines.peek().copied() {
            if parse_entry(line).is_some() {
                break;
            }
            for token in line.split(|c: char| c == ',' || c.is_whitespace()) {
                let parse = |v: &str| {
                    v.trim().parse::<usize>().map_err(|_| Error::Parse {
                        line: no + 1,
                        message: format!("bad header value in {token:?}"),
                    })
                };
                if let Some(v) = token.trim().strip_prefix("NORB=") {
                    norb = Some(parse(v)?);
                } else if let Some(v) = token.trim().strip_prefix("NELEC=") {
                    nelec = Some(parse(v)?);
                }
            }
            lines.next();
        }
        let n = norb.ok_or(Error::Parse { line: 1, message: "missing NORB in header".into() })?;
        let ne = nelec.ok_or(Error::Parse { line: 1, message: "missing NELEC in header".into() })?;
        if n == 0 || n > ORBITAL_CAP {
            return Err(Error::ResourceLimit { what: "integral file", qubits: n, cap: ORBITAL_CAP });
        }
        if ne > n {
            return Err(Error::Parse { line: 1, message: format!("NELEC={ne} exceeds NORB={n}") });
        }
        let mut f = Self::zero(n);
        let mut chem: BTreeMap<[usize; 4], f64> = BTreeMap::new();
        for (no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (v, idx) = parse_entry(line).ok_or_else(|| Error::Parse {
                line: no + 1,
                message: format!("expected `value i j k l`, got {line:?}"),
            })?;
            if idx.iter().any(|&x| x > n) {
                return Err(Error::Parse { line: no + 1, message: format!("index above NORB={n}") });
            }
            match idx {
                [0, 0, 0, 0] => f.constant += v,
                [i, j, 0, 0] if i > 0 && j > 0 => {
                    f.one_body[(i - 1, j - 1)] = c64::new(v, 0.0);
                    f.one_body[(j - 1, i - 1)] = c64::new(v, 0.0);
                }
                [i, j, k, l] if i > 0 && j > 0 && k > 0 && l > 0 => {
                    let [i, j, k, l] = [i - 1, j - 1, k - 1, l - 1];
                    for key in [
                        [i, j, k, l],
                        [j, i, k, l],
                        [i, j, l, k],
                        [j, i, l, k],
                        [k, l, i, j],
                        [l, k, i, j],
                        [k, l, j, i],
                        [l, k, j, i],
                    ] {
                        chem.insert(key, v);
                    }
                }
                _ => return Err(Error::Parse { line: no + 1, message: "mixed zero and nonzero indices".into() }),
            }
        }
        if !chem.is_empty() {
            let g = f.two_body_mut();
            for ([i, j, k, l], v) in &chem {
                g[((i * n + j) * n + k) * n + l] += c64::new(0.5 * v, 0.0);
            }
            // a_i†a_k†a_l a_j = E_ij E_kl − δ_jk E_il
            for ([i, j, k, l], v) in chem {
                if j == k {
                    f.one_body[(i, l)] -= c64::new(0.5 * v, 0.0);
                }
            }
        }
        Ok((f, ne))
    }

    pub fn load_integrals(path: impl AsRef<Path>) -> Result<(Self, usize)> {
        Self::from_integral_str(&fs::read_to_string(path)?)
    }
}

fn parse_entry(line: &str) -> Option<(f64, [usize; 4])> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 5 {
        return None;
    }
    let v = tokens[0].parse::<f64>().ok()?;
    let mut idx = [0usize; 4];
    for (slot, t) in idx.iter_mut().zip(&tokens[1..]) {
        *slot = t.parse().ok()?;
    }
    Some((v, idx))
}

/// Sparse Pauli expansion keyed by `(x, z)` masks.
#[derive(Debug, Clone, PartialEq)]
struct PauliSum {
    n: usize,
    terms: BTreeMap<(u64, u64), c64>,
}

impl PauliSum {
    fn scalar(n: usize, c: c64) -> Self {
        let mut terms = BTreeMap::new();
        if c != zero() {
            terms.insert((0, 0), c);
        }
        PauliSum { n, terms }
    }

    fn add_term(&mut self, x: u64, z: u64, c: c64) {
        *self.terms.entry((x, z)).or_insert(zero()) += c;
    }

    fn add_scaled(&mut self, other: &PauliSum, c: c64) {
        for (&(x, z), v) in &other.terms {
            self.add_term(x, z, v * c);
        }
    }

    fn mul(&self, rhs: &PauliSum) -> PauliSum {
        let mut out = PauliSum::scalar(self.n, zero());
        for (&(x1, z1), a) in &self.terms {
            let p1 = PauliString::from_masks(self.n, x1, z1);
            for (&(x2, z2), b) in &rhs.terms {
                let (phase, p) = p1.mul(&PauliString::from_masks(self.n, x2, z2));
                out.add_term(p.x_mask(), p.z_mask(), phase * a * b);
            }
        }
        out
    }

    fn into_hamiltonian(self) -> Result<Hamiltonian> {
        let n = self.n;
        Hamiltonian::canonicalize(n, self.terms.into_iter().map(|((x, z), c)| (PauliString::from_masks(n, x, z), c)))
    }
}

/// Letter-form masks: `Y` is `x = z = 1`.
fn ladder(n: usize, j: usize, creation: bool) -> PauliSum {
    let zs = (1u64 << j) - 1;
    let bit = 1u64 << j;
    let mut s = PauliSum::scalar(n, zero());
    s.add_term(bit, zs, c64::new(0.5, 0.0));
    s.add_term(bit, zs | bit, c64::new(0.0, if creation { -0.5 } else { 0.5 }));
    s
}

/// `a_i†a_j`.
fn excitation(n: usize, i: usize, j: usize) -> PauliSum {
    ladder(n, i, true).mul(&ladder(n, j, false))
}

/// Encoded `a_j` (or `a_j†`) on `n` qubits, with complex coefficients.
pub fn ladder_operator(n: usize, j: usize, creation: bool) -> Result<Hamiltonian> {
    if j >= n || n > ORBITAL_CAP {
        return Err(Error::InvalidArgument(format!("orbital {j} outside 0..{n} (cap {ORBITAL_CAP})")));
    }
    ladder(n, j, creation).into_hamiltonian()
}

/// Shift parameters `(ξ0, ξ, N_e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlissParams {
    pub xi0: f64,
    pub xi: DMatrix<c64>,
    pub n_electrons: usize,
}

impl BlissParams {
    pub fn zero(n_orb: usize, n_electrons: usize) -> Self {
        BlissParams { xi0: 0.0, xi: DMatrix::zeros(n_orb, n_orb), n_electrons }
    }

    fn validate(&self, n_orb: usize) -> Result<()> {
        if self.xi.shape() != (n_orb, n_orb) {
            return Err(Error::InvalidArgument(format!("ξ must be {n_orb}×{n_orb}")));
        }
        if (&self.xi - self.xi.adjoint()).iter().any(|x| x.norm() > SYM_TOL) {
            return Err(Error::InvalidArgument("ξ is not Hermitian".into()));
        }
        if self.n_electrons > n_orb {
            return Err(Error::InvalidArgument(format!("N_e = {} exceeds {n_orb} orbitals", self.n_electrons)));
        }
        Ok(())
    }

    /// `[ξ0, ξ_00, …, ξ_{N−1,N−1}, Re ξ_01, Im ξ_01, Re ξ_02, …]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let n = self.xi.nrows();
        let mut v = vec![self.xi0];
        v.extend((0..n).map(|i| self.xi[(i, i)].re));
        for i in 0..n {
            for j in i + 1..n {
                v.push(self.xi[(i, j)].re);
                v.push(self.xi[(i, j)].im);
            }
        }
        v
    }

    pub fn from_vector(n_orb: usize, n_electrons: usize, v: &[f64]) -> Self {
        let mut p = Self::zero(n_orb, n_electrons);
        let mut it = v.iter().copied();
        p.xi0 = it.next().unwrap_or(0.0);
        for i in 0..n_orb {
            p.xi[(i, i)] = c64::new(it.next().unwrap_or(0.0), 0.0);
        }
        for i in 0..n_orb {
            for j in i + 1..n_orb {
                let c = c64::new(it.next().unwrap_or(0.0), it.next().unwrap_or(0.0));
                p.xi[(i, j)] = c;
                p.xi[(j, i)] = c.conj();
            }
        }
        p
    }
}

/// `F − (ξ0 + Σ ξ_ij a_i†a_j)(N̂ − N_e)`, written back into constant,
/// one-body and two-body coefficients.
pub fn apply_bliss(f: &FermionicOperator, params: &BlissParams) -> Result<FermionicOperator> {
    f.validate()?;
    params.validate(f.n_orb)?;
    let n = f.n_orb;
    let ne = params.n_electrons as f64;
    let mut out = f.clone();
    out.constant += params.xi0 * ne;
    for i in 0..n {
        out.one_body[(i, i)] -= c64::new(params.xi0, 0.0);
    }
    if params.xi.iter().any(|x| *x != zero()) {
        out.one_body += &params.xi * c64::new(ne, 0.0);
        let g = out.two_body_mut();
        for i in 0..n {
            for j in 0..n {
                let half = params.xi[(i, j)] * 0.5;
                if half == zero() {
                    continue;
                }
                for k in 0..n {
                    g[((i * n + j) * n + k) * n + k] -= half;
                    g[((k * n + k) * n + i) * n + j] -= half;
                }
            }
        }
    }
    Ok(out)
}

/// Which shift parameters the optimizer may move.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftFamily {
    /// `ξ0` only.
    Scalar,
    /// `ξ0` and a diagonal `ξ`.
    Diagonal,
    /// `ξ0` and a full Hermitian `ξ`.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlissOptions {
    pub family: ShiftFamily,
    pub tolerance: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for BlissOptions {
    fn default() -> Self {
        BlissOptions { family: ShiftFamily::Full, tolerance: 1e-8, max_sweeps: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct BlissOutcome {
    pub params: BlissParams,
    /// Encoded shifted operator; `None` when every coefficient cancels.
    pub hamiltonian: Option<Hamiltonian>,
    pub initial_norm: f64,
    pub final_norm: f64,
    /// Objective after every accepted step, starting at the unshifted value.
    pub history: Vec<f64>,
    pub sweeps: usize,
    /// False when `max_sweeps` ran out before the stopping rule fired.
    pub converged: bool,
    pub family: ShiftFamily,
}

/// Affine model `c(θ) = c0 + Σ_p θ_p d_p` of the Pauli coefficients.
struct AffineCoefficients {
    c0: Vec<f64>,
    /// `columns[p][row]`.
    columns: Vec<Vec<f64>>,
}

impl AffineCoefficients {
    fn build(f: &FermionicOperator, n_electrons: usize, n_params: usize) -> Result<Self> {
        let base = f.pauli_sum()?;
        let mut zero_op = FermionicOperator::zero(f.n_orb);
        zero_op.two_body = None;
        let mut directions = Vec::with_capacity(n_params);
        for p in 0..n_params {
            let mut e = vec![0.0; n_params];
            e[p] = 1.0;
            let params = BlissParams::from_vector(f.n_orb, n_electrons, &e);
            directions.push(apply_bliss(&zero_op, &params)?.pauli_sum()?);
        }
        let mut keys: BTreeMap<(u64, u64), usize> = BTreeMap::new();
        for s in std::iter::once(&base).chain(&directions) {
            for k in s.terms.keys() {
                let next = keys.len();
                keys.entry(*k).or_insert(next);
            }
        }
        let real = |s: &PauliSum| {
            let mut v = vec![0.0; keys.len()];
            for (k, c) in &s.terms {
                v[keys[k]] = c.re;
            }
            v
        };
        Ok(AffineCoefficients { c0: real(&base), columns: directions.iter().map(real).collect() })
    }

    fn residual(&self, theta: &[f64]) -> Vec<f64> {
        let mut r = self.c0.clone();
        for (t, col) in theta.iter().zip(&self.columns) {
            if *t != 0.0 {
                for (ri, ci) in r.iter_mut().zip(col) {
                    *ri += t * ci;
                }
            }
        }
        r
    }

    fn direction(&self, d: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.c0.len()];
        for (t, col) in d.iter().zip(&self.columns) {
            if *t != 0.0 {
                for (ui, ci) in u.iter_mut().zip(col) {
                    *ui += t * ci;
                }
            }
        }
        u
    }
}

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

/// Minimizer of `Σ |r_i + δ u_i|` over `δ`: a weighted median of `−r_i/u_i`.
fn line_minimum(r: &[f64], u: &[f64]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = r
        .iter()
        .zip(u)
        .filter(|(_, ui)| ui.abs() > 1e-14)
        .map(|(ri, ui)| (-ri / ui, ui.abs()))
        .collect();
    if pts.is_empty() {
        return None;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let half = pts.iter().map(|p| p.1).sum::<f64>() / 2.0;
    let mut acc = 0.0;
    for (t, w) in &pts {
        acc += w;
        if acc >= half {
            return Some(*t);
        }
    }
    pts.last().map(|p| p.0)
}

struct Descent<'a> {
    model: &'a AffineCoefficients,
    theta: Vec<f64>,
    residual: Vec<f64>,
    value: f64,
    history: Vec<f64>,
}

impl Descent<'_> {
    /// Exact line search along `d`; keeps the move only if it lowers the objective.
    fn step(&mut self, d: &[f64]) -> f64 {
        let u = self.model.direction(d);
        let Some(delta) = line_minimum(&self.residual, &u) else {
            return 0.0;
        };
        let trial: Vec<f64> = self.residual.iter().zip(&u).map(|(r, ui)| r + delta * ui).collect();
        let value = l1(&trial);
        let gain = self.value - value;
        if gain > 0.0 {
            for (t, di) in self.theta.iter_mut().zip(d) {
                *t += delta * di;
            }
            // refresh from the model so rounding does not accumulate
            self.residual = self.model.residual(&self.theta);
            self.value = l1(&self.residual);
            self.history.push(self.value);
            gain
        } else {
            0.0
        }
    }
}

fn active_params(n_orb: usize, family: ShiftFamily) -> usize {
    match family {
        ShiftFamily::Scalar => 1,
        ShiftFamily::Diagonal => 1 + n_orb,
        ShiftFamily::Full => 1 + n_orb * n_orb,
    }
}

/// Minimizes `‖α‖₁` of the encoded shifted operator over `(ξ0, ξ)` with the default options.
pub fn optimize_bliss(f: &FermionicOperator, n_electrons: usize) -> Result<BlissOutcome> {
    optimize_bliss_with(f, n_electrons, &BlissOptions::default())
}

/// Coordinate descent with exact line searches; when a sweep stalls, pairwise
/// and random directions are tried to move off kinks of the objective.
pub fn optimize_bliss_with(f: &FermionicOperator, n_electrons: usize, opts: &BlissOptions) -> Result<BlissOutcome> {
    f.validate()?;
    let n = f.n_orb;
    if n_electrons > n {
        return Err(Error::InvalidArgument(format!("N_e = {n_electrons} exceeds {n} orbitals")));
    }
    let family = if n > TWO_BODY_SHIFT_CAP { ShiftFamily::Scalar } else { opts.family };
    let n_params = active_params(n, family);
    let model = AffineCoefficients::build(f, n_electrons, n_params)?;
    let theta = vec![0.0; n_params];
    let residual = model.residual(&theta);
    let value = l1(&residual);
    let initial_norm = value;
    let mut run = Descent { model: &model, theta, residual, value, history: vec![value] };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let unit = |p: usize| {
        let mut e = vec![0.0; n_params];
        e[p] = 1.0;
        e
    };
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let before = run.value;
        for p in 0..n_params {
            run.step(&unit(p));
        }
        if before - run.value > opts.tolerance {
            continue;
        }
        let mut escaped = 0.0;
        for p in 0..n_params {
            for q in p + 1..n_params {
                for s in [1.0, -1.0] {
                    let mut d = unit(p);
                    d[q] = s;
                    escaped += run.step(&d);
                }
            }
        }
        for _ in 0..4 * n_params {
            let d: Vec<f64> = (0..n_params).map(|_| rng.random_range(-1.0..1.0)).collect();
            escaped += run.step(&d);
        }
        if escaped <= opts.tolerance {
            converged = true;
            break;
        }
    }
    let params = BlissParams::from_vector(n, n_electrons, &run.theta);
    let shifted = apply_bliss(f, &params)?.pauli_sum()?;
    let hamiltonian = if shifted.terms.values().all(|c| c.norm() <= ZERO_TOL) {
        None
    } else {
        Some(shifted.into_hamiltonian()?)
    };
    let final_norm = hamiltonian.as_ref().map_or(0.0, Hamiltonian::l1_norm);
    Ok(BlissOutcome {
        params,
        hamiltonian,
        initial_norm,
        final_norm,
        history: run.history,
        sweeps,
        converged,
        family,
    })
}

/// Ascending eigenvalues of `h` restricted to basis states with `n_electrons` ones.
pub fn sector_spectrum(h: &Hamiltonian, n_electrons: usize) -> Result<Vec<f64>> {
    let m = h.to_matrix_capped(DENSE_CAP)?;
    let basis: Vec<usize> = (0..m.nrows()).filter(|i| i.count_ones() as usize == n_electrons).collect();
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let sub = DMatrix::from_fn(basis.len(), basis.len(), |r, c| m[(basis[r], basis[c])]);
    let mut ev: Vec<f64> = SymmetricEigen::new(sub).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn fermionic_sector_spectrum(f: &FermionicOperator, n_electrons: usize) -> Result<Vec<f64>> {
    sector_spectrum(&f.jordan_wigner()?, n_electrons)
}

/// Basis state with the lowest `n_electrons` spin orbitals occupied.
pub fn lowest_occupation_state(n_orb: usize, n_electrons: usize) -> Vec<c64> {
    let mut v = vec![zero(); 1usize << n_orb];
    v[(1usize << n_electrons) - 1] = c64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(h: &Hamiltonian, s: &str) -> Option<c64> {
        let p: PauliString = s.parse().unwrap();
        h.terms().iter().find(|t| t.letters == p).map(|t| t.coefficient())
    }

    #[test]
    fn number_operator_encoding() {
        let f = FermionicOperator::number_operator(1);
        let h = f.jordan_wigner().unwrap();
        assert_eq!(h.len(), 2);
        assert!((term(&h, "I").unwrap() - 0.5).norm() < 1e-15);
        let z = h.terms().iter().find(|t| t.letters == "Z".parse().unwrap()).unwrap();
        assert!((z.weight - 0.5).abs() < 1e-15);
        assert!((z.phase - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn hopping_encoding() {
        let mut f = FermionicOperator::zero(2);
        f.one_body[(0, 1)] = c64::new(1.0, 0.0);
        f.one_body[(1, 0)] = c64::new(1.0, 0.0);
        let h = f.jordan_wigner().unwrap();
        assert_eq!(h.len(), 2);
        assert!((term(&h, "XX").unwrap() - 0.5).norm() < 1e-15);
        assert!((term(&h, "YY").unwrap() - 0.5).norm() < 1e-15);
    }

    #[test]
    fn hubbard_norm() {
        let f = FermionicOperator::hubbard_chain(4, 1.0, 4.0).unwrap();
        let h = f.jordan_wigner().unwrap();
        // 12 hopping terms of 0.5, 4 ZZ of 1, 8 Z of 1, identity 4
        assert!((h.l1_norm() - 22.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_shift_expansion() {
        let f = FermionicOperator::hubbard_chain(2, 1.0, 4.0).unwrap();
        let mut p = BlissParams::zero(4, 2);
        p.xi0 = 0.7;
        let g = apply_bliss(&f, &p).unwrap();
        assert!((g.constant - 1.4).abs() < 1e-15);
        for i in 0..4 {
            assert!((g.one_body[(i, i)] - f.one_body[(i, i)] + 0.7).norm() < 1e-15);
        }
        assert_eq!(apply_bliss(&f, &BlissParams::zero(4, 2)).unwrap(), f);
    }

    #[test]
    fn optimizer_cancels_pure_shift() {
        let mut f = FermionicOperator::number_operator(3);
        f.one_body *= c64::new(1.5, 0.0);
        f.constant = -3.0;
        let out = optimize_bliss(&f, 2).unwrap();
        assert!(out.final_norm < 1e-9, "{}", out.final_norm);
        assert!((out.params.xi0 - 1.5).abs() < 1e-9);
        assert!(out.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn optimizer_never_worse() {
        let mut f = FermionicOperator::zero(2);
        f.one_body[(0, 1)] = c64::new(0.3, 0.2);
        f.one_body[(1, 0)] = c64::new(0.3, -0.2);
        let out = optimize_bliss(&f, 1).unwrap();
        assert!(out.final_norm <= out.initial_norm + 1e-12);
    }

    #[test]
    fn sector_spectrum_cases() {
        let mut shift = FermionicOperator::number_operator(3);
        shift.constant = -2.0;
        let ev = fermionic_sector_spectrum(&shift, 2).unwrap();
        assert_eq!(ev.len(), 3);
        assert!(ev.iter().all(|e| e.abs() < 1e-12));

        let mut hop = FermionicOperator::zero(2);
        hop.one_body[(0, 1)] = c64::new(1.0, 0.0);
        hop.one_body[(1, 0)] = c64::new(1.0, 0.0);
        let vac = fermionic_sector_spectrum(&hop, 0).unwrap();
        assert_eq!(vac.len(), 1);
        assert!(vac[0].abs() < 1e-12);
    }

    #[test]
    fn integral_file_roundtrip() {
        let text = "NORB=2 NELEC=1\n-1.0 1 2 0 0\n4.0 1 1 2 2\n0.5 0 0 0 0\n";
        let (f, ne) = FermionicOperator::from_integral_str(text).unwrap();
        assert_eq!(ne, 1);
        assert_eq!(f.constant, 0.5);
        assert_eq!(f.one_body[(1, 0)], c64::new(-1.0, 0.0));
        let g = f.two_body.as_ref().unwrap();
        assert_eq!(g[f.idx(0, 0, 1, 1)], c64::new(2.0, 0.0));
        assert!(f.validate().is_ok());
        assert_eq!(g[f.idx(1, 1, 0, 0)], c64::new(2.0, 0.0));
        assert!(FermionicOperator::from_integral_str("NORB=2\n").is_err());
        assert!(FermionicOperator::from_integral_str("NORB=2 NELEC=1\n1.0 3 1 0 0\n").is_err());
    }

    #[test]
    fn params_vector_roundtrip() {
        let v: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let p = BlissParams::from_vector(3, 1, &v);
        assert_eq!(p.to_vector(), v);
        assert!(p.validate(3).is_ok());
    }
}
