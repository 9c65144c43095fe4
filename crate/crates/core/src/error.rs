use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("half-dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected length {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("vector has a non-finite coordinate")]
    NonFinite,

    #[error("expected a unit vector, got norm {norm}")]
    NotUnit { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficients must be pairwise distinct (a[{first}] = a[{second}])")]
    RepeatedCoefficient { first: usize, second: usize },

    #[error("perturbation too large: eps^2 = {eps_sq} must be below delta = {delta}")]
    PerturbationTooLarge { eps_sq: f64, delta: f64 },

    #[error("support function is not positive at direction {direction:?} (h = {value})")]
    OriginNotInterior { direction: Vec<f64>, value: f64 },

    #[error(
        "surface is not strictly convex at direction {direction:?} \
         (smallest principal radius {min_radius:e})"
    )]
    NotConvex { direction: Vec<f64>, min_radius: f64 },

    #[error("point is not exterior to the surface")]
    NotExterior,

    #[error("solver did not converge (best residual {best_residual:e})")]
    NoConvergence { best_residual: f64 },

    #[error("period must be odd and at least 3, got {0}")]
    InvalidPeriod(usize),

    #[error("singular linear system: {0}")]
    Singular(&'static str),

    #[error("surface spec line {line}: {message}")]
    SurfaceSpec { line: usize, message: String },

    #[error("numeric sweep found a critical point outside the predicted orbits: {point:?}")]
    UnexpectedCriticalPoint { point: Vec<f64> },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
