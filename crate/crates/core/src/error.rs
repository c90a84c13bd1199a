use std::path::PathBuf;

use thiserror::Error;

/// Failures raised anywhere in the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "quadrature did not converge for {what}: error estimate {estimate:e} > tolerance {tol:e}"
    )]
    NonConvergence {
        what: String,
        estimate: f64,
        tol: f64,
    },

    #[error(
        "integrand is singular: L({n}) diverges near g = 1 (g = {g}); use the combined G kernel"
    )]
    SingularIntegrand { n: i64, g: f64 },

    #[error("leading-minor recursion broke down at order {order} (minor = {minor:e})")]
    RecursionBreakdown { order: usize, minor: f64 },

    #[error("exact diagonalization limited to L <= {max}, got L = {l}")]
    DimensionTooLarge { l: usize, max: usize },

    #[error("eigensolver did not converge: residual {residual:e}")]
    EigenNonConvergence { residual: f64 },

    #[error("system sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("negative variance {0:e}: correlators are inconsistent")]
    NegativeVariance(f64),

    #[error("power-law fit needs strictly positive data, got ({x}, {y})")]
    NonPositiveData { x: f64, y: f64 },

    #[error("all abscissae are equal; slope is undefined")]
    DegenerateAbscissa,

    #[error("power-law fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),

    #[error("no grid point satisfies the scaling window: {0}")]
    WindowEmpty(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cache record {path} has the same key but a different payload")]
    VersionConflict { path: PathBuf },

    #[error("malformed cache record {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
