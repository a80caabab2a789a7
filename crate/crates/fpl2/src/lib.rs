//! Integrable structure of the two-colour fully packed loop model (FPL²).
//!
//! The crate builds the quantum-group R-matrices and their gauge-equivalent
//! 24-vertex form, assembles twisted transfer matrices, checks them against
//! brute-force enumeration, solves the nested Bethe equations and extracts
//! finite-size scaling data.

pub mod bethe;
pub mod cft_scaling;
pub mod cli;
pub mod couplings;
pub mod error;
pub mod linalg;
pub mod loop_oracle;
pub mod rmatrix;
pub mod tensor_kernel;
pub mod transfer;

pub use couplings::{CouplingSet, C64};
pub use error::{Error, Result};
