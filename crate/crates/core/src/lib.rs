//! Spectral analysis of half-line Jacobi operators with periodic background:
//! transfer matrices, Floquet branches, Jost solutions, spectral measures
//! and numerical certificates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod certify;
pub mod coefficients;
pub mod error;
pub mod jost;
pub mod measures;
pub mod roots;
pub mod transfer;

pub use coefficients::{CoefficientModel, Coefficients, PeriodicBlock, Perturbation};
pub use error::{Error, Result};
