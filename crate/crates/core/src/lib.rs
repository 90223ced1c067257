//! Qubit channels induced by partially known Lorentz transformations between
//! two inertial observers, and the quantum Fisher information they leave.

pub mod channels;
pub mod cli;
pub mod error;
pub mod metrology;
pub mod quadrature;
pub mod qubit;
pub mod scenarios;
pub mod special;
pub mod wigner;

pub use error::{Error, Result};
