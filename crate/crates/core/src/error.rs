use thiserror::Error;

/// Domain and contract violations raised by the statistical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("trial count m must be at least 1")]
    ZeroTrials,
    #[error("success count {t} exceeds trial count {m}")]
    CountExceedsTrials { t: u64, m: u64 },
    #[error("probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("normal approximation is undefined for degenerate p = {0}")]
    DegenerateNormal(f64),
    #[error("z statistic must be finite, got {0}")]
    NonFiniteZ(f64),
    #[error("exact oracle supports m <= {limit}, got m = {m}")]
    OracleScale { m: u64, limit: u64 },
    #[error("incomplete beta continued fraction did not converge (a = {a}, b = {b}, x = {x})")]
    NoConvergence { a: f64, b: f64, x: f64 },
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("evaluation set is empty")]
    EmptyEvaluation,
    #[error("training label list is empty")]
    EmptyTraining,
    #[error("class id {0} is not part of the label alphabet")]
    UnknownClass(usize),
    #[error("at least 2 classes are required, got {0}")]
    TooFewClasses(usize),
    #[error("NIR baseline requires training labels to estimate class priors")]
    MissingPriors,
}

pub type Result<T, E = StatsError> = std::result::Result<T, E>;
