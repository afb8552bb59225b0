use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mass matrix could not be factored")]
    SingularMassMatrix,

    #[error("target ({x:.6}, {y:.6}) is outside the reachable workspace")]
    OutOfWorkspace { x: f64, y: f64 },

    #[error("kinematic singularity: |det J| = {det:.3e}")]
    Singularity { det: f64 },

    #[error("inverse kinematics did not converge (residual {residual:.3e})")]
    IkDiverged { residual: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("invalid override `{key}`: {reason}")]
    InvalidOverride { key: String, reason: String },

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}

pub(crate) fn check_finite(context: &'static str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context))
    }
}
