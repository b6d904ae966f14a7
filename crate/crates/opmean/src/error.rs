use thiserror::Error;

/// Errors shared across the matrix, mean, divergence, barycenter, and
/// geodesic modules.
#[derive(Debug, Error)]
pub enum OpMeanError {
    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix is not positive definite (lambda_min = {lambda_min:.3e}, lambda_max = {lambda_max:.3e})")]
    NotPositiveDefinite { lambda_min: f64, lambda_max: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigenvalue {value} outside the function domain ({lo}, {hi})")]
    DomainError { value: f64, lo: f64, hi: f64 },

    #[error("value {value} outside the range ({lo}, {hi}) of the representing function")]
    RangeError { value: f64, lo: f64, hi: f64 },

    #[error("invalid weights: {0}")]
    WeightError(String),

    #[error("mean '{0}' has a non-surjective representing function; the barycenter solver requires ran(f) = (0, inf)")]
    NotSurjective(String),

    #[error("solver exceeded {0} iterations without meeting the gradient tolerance")]
    MaxItersExceeded(usize),

    #[error("line search stalled: step size underflow (the problem is likely ill-conditioned)")]
    LineSearchStalled,

    #[error("arc-length quadrature failed to converge below {0} panels")]
    QuadratureStalled(usize),

    #[error("negative radicand {0:.3e} in the S-divergence (beyond the numerical-noise clamp)")]
    NegativeRadicand(f64),

    #[error("unknown mean '{0}' (expected arithmetic | harmonic | geometric | logarithmic)")]
    UnknownMean(String),
}

pub type Result<T> = std::result::Result<T, OpMeanError>;
