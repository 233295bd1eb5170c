use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid Lebesgue exponent {0}: must be >= 1 or infinity")]
    InvalidExponent(f64),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("field contains NaN or infinite samples")]
    NonFinite,

    #[error("{0} requires a nonzero input")]
    ZeroInput(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("Picard iteration did not converge in {} iterations (last error {:e})", .errors.len(), .errors.last().copied().unwrap_or(f64::NAN))]
    PicardDiverged { errors: Vec<f64> },

    #[error("numerical blow-up detected; last valid time t = {last_valid_time}")]
    NumericalAbort { last_valid_time: f64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }
}
