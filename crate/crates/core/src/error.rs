use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range on axis {axis} (size {size})")]
    IndexOutOfRange {
        axis: usize,
        index: usize,
        size: usize,
    },

    #[error("index has {got} components, tensor has {expected} axes")]
    IndexArity { expected: usize, got: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("capacity exceeded: {required} entries required, {allowed} allowed")]
    Capacity { required: u128, allowed: u128 },

    #[error("invalid tensor train: {0}")]
    InvalidTensorTrain(String),

    #[error("oracle failed at index {index:?}: {message}")]
    Oracle { index: Vec<usize>, message: String },

    #[error("singular cross block{}: {message}", bond.map(|b| format!(" at bond {b}")).unwrap_or_default())]
    Singular {
        bond: Option<usize>,
        message: String,
    },

    #[error("maxvol did not converge after {iterations} iterations")]
    Convergence { iterations: usize },

    #[error("oracle call budget of {budget} exceeded ({requested} calls requested)")]
    Budget { budget: u64, requested: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("strip condition violated: {0}")]
    StripViolation(String),

    #[error("correlation matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("imaginary residue {residue:.3e} exceeds tolerance {tolerance:.1e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Configuration and input-validation failures, as opposed to numerical ones.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Domain(_) | Error::StripViolation(_) | Error::NotPositiveDefinite
        )
    }
}
