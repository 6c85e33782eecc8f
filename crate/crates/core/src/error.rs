use thiserror::Error;

use crate::model::ValidationReport;

/// Every failure the library can report.
///
/// Variants map onto the command-line exit codes through [`TubeError::exit_code`].
#[derive(Debug, Clone, Error)]
pub enum TubeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("total spray volume diverges: sum of r_j^n = {power_sum} >= 1")]
    Divergence { power_sum: f64 },

    #[error("resource guard: {count} items exceed the limit of {limit} ({what})")]
    Resource { what: &'static str, count: u64, limit: u64 },

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("zero too close to the contour boundary: {0}")]
    BoundaryProximity(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("s = {re} + {im}i lies within 1e-12 of the pole at {pole}")]
    PoleProximity { re: f64, im: f64, pole: usize },

    #[error("window error: {0}")]
    Window(String),

    #[error("abscissa c = {c} outside the strip ({lower}, {upper})")]
    Strip { c: f64, lower: f64, upper: f64 },

    #[error("model failed validation:\n{0}")]
    Validation(ValidationReport),

    #[error("configuration error: {0}")]
    Config(String),
}

impl TubeError {
    /// 2 for validation/configuration problems, 3 for numerical
    /// non-convergence, 4 for the resource guard.
    pub fn exit_code(&self) -> i32 {
        match self {
            TubeError::Convergence(_) | TubeError::BoundaryProximity(_) => 3,
            TubeError::Resource { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, TubeError>;
