//! Bit-packed Pauli strings.
//!
//! A string over `{I, X, Y, Z}` on `n <= 64` qubits is stored as two masks.
//! Letter `j` acts on qubit `j`, and qubit `j` is bit `j` of a basis-state
//! index. The string denotes the plain tensor product of its letters, so
//! `Y = i·X·Z` on every qubit where both masks are set.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
}

/// `i^k` for `k` taken mod 4.
pub(crate) fn i_pow(k: u32) -> c64 {
    match k % 4 {
        0 => c64::new(1.0, 0.0),
        1 => c64::new(0.0, 1.0),
        2 => c64::new(-1.0, 0.0),
        _ => c64::new(0.0, -1.0),
    }
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_QUBITS, "Pauli strings support at most 64 qubits");
        PauliString { n, x: 0, z: 0 }
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= MAX_QUBITS, "Pauli strings support at most 64 qubits");
        let keep = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        assert!(x & !keep == 0 && z & !keep == 0, "mask exceeds string width");
        PauliString { n, x, z }
    }

    pub fn from_letters(letters: &[Pauli]) -> Self {
        let mut s = PauliString::identity(letters.len());
        for (q, &p) in letters.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    /// Single letter `p` on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = PauliString::identity(n);
        s.set(q, p);
        s
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for width {}", self.n);
        let bit = 1u64 << q;
        let (x, z) = p.bits();
        self.x = if x { self.x | bit } else { self.x & !bit };
        self.z = if z { self.z | bit } else { self.z & !bit };
    }

    pub fn get(&self, q: usize) -> Pauli {
        let bit = 1u64 << q;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn letters(&self) -> impl Iterator<Item = Pauli> + '_ {
        (0..self.n).map(move |q| self.get(q))
    }

    /// Number of `Y` letters.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Action on a computational basis state: `P|s> = factor |target>`.
    #[inline]
    pub fn apply_to_basis(&self, s: usize) -> (usize, c64) {
        let s64 = s as u64;
        let mut factor = i_pow(self.y_count());
        if (s64 & self.z).count_ones() % 2 == 1 {
            factor = -factor;
        }
        ((s64 ^ self.x) as usize, factor)
    }

    /// Product `self · rhs` as `(phase, string)`.
    pub fn mul(&self, rhs: &PauliString) -> (c64, PauliString) {
        assert_eq!(self.n, rhs.n, "Pauli width mismatch");
        let x = self.x ^ rhs.x;
        let z = self.z ^ rhs.z;
        // letters = i^{y} X^x Z^z; commuting Z^{z1} past X^{x2} costs (-1)^{|z1 & x2|}
        let y3 = (x & z).count_ones();
        let k = self.y_count() + rhs.y_count() + 4 - (y3 % 4) + 2 * ((self.z & rhs.x).count_ones() % 2);
        (i_pow(k), PauliString { n: self.n, x, z })
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in self.letters() {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Character `j` of the string is the letter on qubit `j`.
    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| {
                Pauli::from_char(c)
                    .ok_or_else(|| Error::InvalidHamiltonian(format!("bad Pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.len() > MAX_QUBITS {
            return Err(Error::InvalidHamiltonian(format!(
                "Pauli string of length {} exceeds {MAX_QUBITS}",
                letters.len()
            )));
        }
        Ok(PauliString::from_letters(&letters))
    }
}
