use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("sign could not be certified within {bits} bits")]
    PrecisionCap { bits: u32 },
    #[error("work limit exceeded: {required} points needed, limit {limit}")]
    WorkLimit { required: u128, limit: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("singular matrix")]
    SingularMatrix,
    #[error("series diverges: {0}")]
    DivergentSeries(String),
    #[error("guard exceeded: {0}")]
    GuardExceeded(String),
}
