//! Fourier analysis and symbol calculus on compact groups, instantiated for
//! SU(2) and the flat torus 𝕋ⁿ.
//!
//! The crate provides, at a finite band limit:
//!
//! * exact Haar quadrature grids and matrix-valued irreducible representations
//!   ([`grid`], [`group`]),
//! * the group Fourier transform pair and Plancherel/Sobolev norms ([`fourier`]),
//! * matrix-valued operator symbols and quantization ([`symbols`]),
//! * difference operators acting on symbols ([`differences`]),
//! * numerical checkers for multiplier and symbol-class conditions
//!   ([`multiplier`]),
//! * a small zoo of named operators with closed-form symbols ([`zoo`]),
//! * randomized Lᵖ probes for operator norms and a-priori inequalities
//!   ([`probe`]).
//!
//! All computations are deterministic: quadrature sums run in a fixed order,
//! random draws are seeded, and parallel sections only map over indexed
//! ranges. Re-running any entry point with the same inputs yields identical
//! bytes in serialized artifacts regardless of thread count.

pub mod differences;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod group;
pub mod halfint;
pub mod io;
pub mod linalg;
pub mod multiplier;
pub mod probe;
pub mod symbols;
pub mod zoo;

pub use error::{Error, Result};
pub use halfint::HalfInt;
