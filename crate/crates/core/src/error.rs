use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("singular matrix: pivot {pivot:e} below threshold (scale {scale:e})")]
    SingularMatrix { pivot: f64, scale: f64 },
    #[error("matrix is not Hermitian: defect {defect:e} (norm {norm:e})")]
    NotHermitian { defect: f64, norm: f64 },
    #[error("negative damping {value} on mode {mode}")]
    NegativeDamping { mode: usize, value: f64 },
    #[error("duplicate mode label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown mode label {0:?}")]
    UnknownLabel(String),
    #[error("mode {0} is not a port (zero damping or out of range)")]
    InvalidPort(usize),
    #[error("network has no damped modes")]
    NoPorts,
    #[error("dynamical matrix singular at omega = {omega}")]
    SingularAtFrequency { omega: f64 },
    #[error("zero detuning on atom {atom}")]
    ZeroDetuning { atom: usize },
    #[error("ensemble has no atoms")]
    EmptyEnsemble,
    #[error("reflection coefficient indeterminate at g = 0, omega = 0")]
    Degenerate,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("time step {dt} exceeds limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("demodulated ratio drifted by {drift:e} over the final window")]
    NonConvergent { drift: f64 },
}
