use thiserror::Error;

/// Errors raised by the alignment library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("quaternion norm {norm} deviates from unity")]
    NonUnitQuaternion { norm: f64 },
    #[error("quaternion has zero norm")]
    ZeroNormQuaternion,
    #[error("matrix is not an orthonormal rotation (deviation {deviation:e})")]
    NonOrthonormalDcm { deviation: f64 },
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("observation window contains no samples")]
    EmptyWindow,
    #[error("sequence lengths differ: {left} vs {right}")]
    MismatchedLengths { left: usize, right: usize },
    #[error("navigation history does not cover window [{start}, {end}]")]
    WindowNotCovered { start: f64, end: f64 },
    #[error("input rotation is not orthonormal (deviation {deviation:e})")]
    NonOrthonormalInput { deviation: f64 },
    #[error("alignment problem has no observations")]
    EmptyProblem,
    #[error("two smallest eigenvalues coincide (relative gap {gap:e}); attitude unobservable")]
    DegenerateEigenspace { gap: f64 },
    #[error("mean integration matrix is ill-conditioned (condition {condition:e}); bias unobservable")]
    IllConditionedChi { condition: f64 },
    #[error("innovation covariance is singular")]
    SingularInnovationCovariance,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("rocking frequency {frequency} Hz violates the Nyquist limit for dt = {dt} s")]
    AliasedProfile { frequency: f64, dt: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("failed to parse config: {0}")]
    ConfigParse(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error at row {row}, column {column}: {message}")]
    Format {
        row: usize,
        column: usize,
        message: String,
    },
    #[error("non-uniform sampling at sample {index}: interval {interval} s, expected {expected} s")]
    NonUniformSampling {
        index: usize,
        interval: f64,
        expected: f64,
    },
    #[error("no truth sample at t = {0} s")]
    TimestampMismatch(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
