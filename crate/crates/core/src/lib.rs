//! Compilation of multimode Gaussian operations into homodyne-angle schedules
//! on the quad-rail lattice (QRL) cluster state, with a symbolic verifier and a
//! finite-squeezing covariance simulator.
//!
//! Conventions used throughout:
//! - quadrature vectors are ordered `(x_1..x_N, p_1..p_N)`;
//! - `hbar = 1`, so the vacuum variance of each quadrature is 1/2;
//! - matrices act in the Heisenberg picture, and an operator product
//!   `A B` applies `B` first;
//! - mode indices are zero-based.

pub mod compile;
pub mod error;
pub mod gaussian;
pub mod lattice;
pub mod teleport;

pub use error::{Arm, Error, Result};
