use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (anti-Hermitian residue {residue:e})")]
    NotHermitian { residue: f64 },

    #[error("trace {trace} differs from 1")]
    TraceNotUnit { trace: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("Bloch vector norm {norm} exceeds 1")]
    BlochOutOfBall { norm: f64 },

    #[error("vector is not unit length (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("state is not pure (purity {purity})")]
    NotPure { purity: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} underflows double precision for delta = {delta}")]
    Underflow { what: &'static str, delta: f64 },

    #[error("sampler gave up after {attempts} rejected proposals")]
    SamplerExhausted { attempts: u64 },

    #[error("quadrature refinement disagreement {disagreement:e} exceeds {tolerance:e}")]
    ResolutionTooCoarse { disagreement: f64, tolerance: f64 },

    #[error("composed Lorentz matrix is not a spatial rotation (residue {residue:e})")]
    NotARotation { residue: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
