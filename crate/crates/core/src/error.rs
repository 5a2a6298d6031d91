use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("degenerate gcd input")]
    DegenerateGcd,
    #[error("modulus must be positive, got {0}")]
    NonPositiveModulus(String),
    #[error("singular matrix")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("zero exponent rate")]
    ZeroExponentRate,
    #[error("insufficient truncation: coefficient of x^{requested} requested, series known up to x^{available}")]
    InsufficientTruncation { requested: i64, available: i64 },
    #[error("perturbation inconsistency: {0}")]
    PerturbationInconsistency(String),
    #[error("k = {k} out of range 0..={n}")]
    KOutOfRange { k: i64, n: usize },
    #[error("f = {0} not in spectrum")]
    NotInSpectrum(String),
    #[error("shift not f-periodic: {0}")]
    ShiftNotPeriodic(String),
    #[error("inconsistent factorization: {0}")]
    InconsistentFactorization(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("period assumption violated: {0}")]
    PeriodAssumptionViolated(String),
    #[error("cancelled")]
    Cancelled,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
