use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid pulse: {0}")]
    InvalidPulse(String),

    #[error("basis index {index} exceeds truncation {n_max}")]
    Truncation { index: usize, n_max: usize },

    #[error("argument {0} must be non-negative")]
    NegativeArgument(f64),

    #[error("kernel is singular at omega*t = {omega_t} (|sin omega*t| = {sin_abs:e})")]
    SingularTime { omega_t: f64, sin_abs: f64 },

    #[error("step control failed at t = {t}: step {step:e} cannot meet tolerance {tol:e}")]
    StepControl { t: f64, step: f64, tol: f64 },

    #[error("quadrature did not converge: estimated error {achieved:e} > requested {requested:e}")]
    QuadratureNonConvergence { achieved: f64, requested: f64 },

    #[error("density {density:e} at the box edge exceeds {limit:e} at t = {time}")]
    BoundaryContamination { time: f64, density: f64, limit: f64 },

    #[error(
        "grid too coarse: {points_per_lobe:.2} points per lobe for state {n} (need {required})"
    )]
    Resolution {
        n: usize,
        points_per_lobe: f64,
        required: f64,
    },
}
