use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("no coupling; charging time undefined")]
    NoCoupling,

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("boson cutoff must be at least 2, got {0}")]
    BosonCutoff(usize),

    #[error("photon cutoff {cutoff} too small for N = {n}: need at least N + 1")]
    CutoffTooSmall { cutoff: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("time grid must start at 0 and be strictly increasing")]
    InvalidGrid,

    #[error("Krylov propagation did not converge at t = {t}: error estimate {estimate:e} with subspace size {size}")]
    KrylovNonConvergence { t: f64, estimate: f64, size: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("coordinate singularity: sin({coordinate}) = {sin_theta:e}")]
    Singularity { coordinate: &'static str, sin_theta: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("energy drift {drift:e} exceeds threshold {threshold:e}")]
    EnergyDrift { drift: f64, threshold: f64 },

    #[error("no energy transfer")]
    NoEnergyTransfer,

    #[error("trajectory too short: {0} points, need at least 100")]
    TrajectoryTooShort(usize),

    #[error("power-law fit needs at least 4 points, got {0}")]
    TooFewPoints(usize),

    #[error("degenerate abscissae in power-law fit")]
    DegenerateAbscissae,

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
