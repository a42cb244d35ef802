use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the spectral pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("off-diagonal coefficient a({n}) = {value} is not positive")]
    Coefficient { n: usize, value: f64 },

    #[error("one-step transfer matrix at site {n} is singular: a({n}) = 0")]
    SingularCoefficient { n: usize },

    #[error("E = {energy} is a band edge of the background (|Δ| = 2)")]
    BandEdge { energy: f64 },

    #[error("Floquet branch is degenerate at E = {energy} (Δ' vanishes)")]
    DegenerateBranch { energy: f64 },

    #[error("monodromy entry C vanishes at ζ = {zeta}")]
    EigenvectorDegeneracy { zeta: Complex64 },

    #[error("renormalized block {n} has no usable eigenbasis at ζ = {zeta}")]
    Diagonalization { n: usize, zeta: Complex64 },

    #[error("Jost function u₀ vanishes at ζ = {zeta}")]
    ZeroJost { zeta: Complex64 },

    #[error("periodic-tail m-function did not converge at ζ = {zeta} within {iterations} iterations")]
    OracleConvergence { zeta: Complex64, iterations: usize },

    #[error("no admissible interval survives margin {margin}")]
    NoAdmissibleInterval { margin: f64 },

    #[error("density {value} at E = {energy} is not positive")]
    DensityDomain { energy: f64, value: f64 },
}

impl Error {
    /// Stable machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::Coefficient { .. } => "coefficient",
            Error::SingularCoefficient { .. } => "singular_coefficient",
            Error::BandEdge { .. } => "band_edge",
            Error::DegenerateBranch { .. } => "degenerate_branch",
            Error::EigenvectorDegeneracy { .. } => "eigenvector_degeneracy",
            Error::Diagonalization { .. } => "diagonalization",
            Error::ZeroJost { .. } => "zero_jost",
            Error::OracleConvergence { .. } => "oracle_convergence",
            Error::NoAdmissibleInterval { .. } => "no_admissible_interval",
            Error::DensityDomain { .. } => "density_domain",
        }
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
