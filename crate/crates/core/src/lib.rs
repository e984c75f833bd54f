//! Executable bi-free probability at desk scale.
//!
//! The crate covers five layers:
//!
//! * [`partitions`]: set partitions, the non-crossing lattice and its Moebius
//!   function, and the bi-non-crossing partitions attached to a face word.
//! * [`functionals`]: truncated joint distributions of two-faced families as
//!   dense moment tables, the moment/cumulant transforms, a numerical
//!   bi-freeness test, and cumulant-level convolution and scaling.
//! * [`fock`]: a truncated full Fock space with sparse left/right creation,
//!   annihilation, and gauge operators, vacuum expectations, amplification to
//!   direct-sum powers, and the standard infinitely divisible operator pair.
//! * [`infdiv`]: infinite-divisibility diagnostics for a two-faced pair:
//!   conditional non-negative definiteness and conditional boundedness of the
//!   cumulant Gram form, reconstruction of a Fock realization from cumulants,
//!   and bi-free Levy process realization on a finite time grid.
//! * [`limits`]: numerical verification of triangular-array limit theorems
//!   and the bi-free central limit theorem.
//!
//! Everything is exact-by-construction where possible (integer Moebius values,
//! depth-counted Fock truncations) and verified against brute-force oracles in
//! the test suite elsewhere.

pub mod error;
pub mod fock;
pub mod functionals;
pub mod infdiv;
pub mod limits;
pub mod partitions;

pub use error::{Error, Result};
