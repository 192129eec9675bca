use thiserror::Error;

/// Errors raised by the library.
///
/// Validation failures (bad inputs) and computation failures (a method's
/// preconditions do not hold for an otherwise valid input) share one enum;
/// [`Error::is_validation`] tells them apart.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian (max deviation {deviation:e})")]
    NonHermitianInput { deviation: f64 },

    #[error("generator is not Hermitian at t = {time} (max deviation {deviation:e})")]
    NonHermitianGenerator { time: f64, deviation: f64 },

    #[error("operator is not unitary (max deviation of U^dagger U from identity {deviation:e})")]
    NonUnitaryInput { deviation: f64 },

    #[error("not a density operator: {reason}")]
    InvalidDensity { reason: String },

    #[error("negative propagation time {0}")]
    NegativeTime(f64),

    #[error("number of propagation steps must be positive")]
    ZeroSteps,

    #[error("observable eigenvalues are not sorted nondecreasingly (a[{index}] = {value} < a[{prev}] = {prev_value})")]
    UnsortedObservable {
        index: usize,
        value: f64,
        prev: usize,
        prev_value: f64,
    },

    #[error("not a probability vector: {reason}")]
    NotAProbabilityVector { reason: String },

    #[error("bandwidth budget omega must be positive and finite, got {0}")]
    InvalidBandwidth(f64),

    #[error("state spectrum does not match the system's spectrum (deviation {deviation:e})")]
    SpectrumMismatch { deviation: f64 },

    #[error("not a permutation of 0..{n}: {reason}")]
    InvalidPermutation { n: usize, reason: String },

    #[error("permutation is not an involution")]
    NotAnInvolution,

    #[error("permutation is not passivizing")]
    NotPassivizing,

    #[error("full enumeration is limited to n <= {max}, got n = {n}")]
    DimensionTooLargeForEnumeration { n: usize, max: usize },

    #[error("observable must have exactly two distinct eigenvalues, found {groups}")]
    NotBivalent { groups: usize },

    #[error("observable or state spectrum is degenerate")]
    DegenerateSpectrum,

    #[error("precondition of method '{method}' failed: {reason}")]
    MethodPreconditionFailed { method: String, reason: String },

    #[error("state is already passive; no transformation is needed")]
    AlreadyPassive,

    #[error("block grouping invalid: {0}")]
    InvalidGrouping(String),

    #[error("block {block:?}: neither isotropy group contains the other")]
    NestingViolation { block: Vec<usize> },

    #[error("block could not be classified")]
    UnclassifiedBlock,

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("bandwidth mismatch: expected {expected}, got {got}")]
    BandwidthMismatch { expected: f64, got: f64 },

    #[error("the two variance formulas disagree: {direct} vs {closed}")]
    FormulaMismatch { direct: f64, closed: f64 },

    #[error("oracle dimension {n} exceeds the limit {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("multistart search did not converge (best {best}, spread {spread:e})")]
    NoConvergence { best: f64, spread: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors caused by malformed input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotSquare { .. }
                | Error::DimensionMismatch { .. }
                | Error::NonHermitianInput { .. }
                | Error::NonUnitaryInput { .. }
                | Error::InvalidDensity { .. }
                | Error::NegativeTime(_)
                | Error::ZeroSteps
                | Error::UnsortedObservable { .. }
                | Error::NotAProbabilityVector { .. }
                | Error::InvalidBandwidth(_)
                | Error::InvalidPermutation { .. }
                | Error::InvalidGrouping(_)
                | Error::InvalidArgument(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
