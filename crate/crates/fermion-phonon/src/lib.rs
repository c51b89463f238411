//! Exact-solution engine for the one-dimensional fermion-phonon model.
//!
//! The crate is organised in layers:
//!
//! * [`model`] holds the physical parameters, stability checks and momentum grids.
//! * [`fock`] is an exact, rational-arithmetic laboratory on a truncated fermion
//!   Fock space used to verify the bosonization identities.
//! * [`bogoliubov`] diagonalizes the quadratic boson Hamiltonian in closed form
//!   and numerically.
//! * [`vertex`] evaluates finite-size fermion correlation functions of the
//!   interacting model through normal-ordered vertex operators.
//! * [`correlators`] provides continuum closed forms, Klein signs and exponents.

pub mod bogoliubov;
pub mod correlators;
pub mod error;
pub mod exec;
pub mod fock;
pub mod model;
pub mod numeric;
pub mod vertex;

pub use error::{Error, Result};
pub use exec::Exec;
