//! Simulation, dense reference oracles and resource counts for truncated
//! Taylor series time evolution built from linear combinations of unitaries.
//!
//! The crate covers three circuit families over a Pauli-string Hamiltonian:
//!
//! * `W_{H̃^k}`: a product of `k` post-selected block encodings of
//!   `H̃ = −iH/‖α‖₁`, measuring the term register after every block,
//! * `W̃`: the shallow circuit with a `κ`-qubit binary Taylor register,
//!   `K = 2^κ − 1` singly-controlled blocks and early abort on a failed
//!   mid-circuit measurement,
//! * `W`: the unary-encoded reference with `K` term registers and a single
//!   deferred post-selection.
//!
//! Modules:
//!
//! * [`hamiltonian`] / [`pauli`]: weighted Pauli strings, model builders, dense export.
//! * [`statevector`]: exact multi-register simulation.
//! * [`circuits`]: plan builders and Taylor coefficients.
//! * [`sampler`]: the shot loop with abort-and-restart and cost accounting.
//! * [`oracle`]: dense closed-form success probabilities and runtime formulas.
//! * [`resources`]: compilation to one- and two-qubit gates and gate counts.
//! * [`bliss`]: Jordan–Wigner encoding and the particle-number symmetry shift
//!   that lowers `‖α‖₁`.
//! * [`output`]: CSV/JSON record emission.
//! * [`cli`]: the `taylor-lcu` command line.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod bliss;
pub mod circuits;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod oracle;
pub mod output;
pub mod pauli;
pub mod resources;
pub mod sampler;
pub mod statevector;

pub use circuits::{build_w_hk, build_w_tilde, build_w_unary, CircuitPlan, Instruction, TaylorCoefficients};
pub use error::{Error, Result};
pub use hamiltonian::{Hamiltonian, PauliTerm};
pub use pauli::{Pauli, PauliString};

pub use sampler::{run_shots, CostModel, RunStats};
pub use statevector::{RegisterLayout, StateVector};

pub use num_complex::Complex64 as c64;
