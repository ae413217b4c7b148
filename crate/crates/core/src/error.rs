use thiserror::Error;

use crate::numerics::NumericsError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("at least one gain distribution is required")]
    EmptyList,

    /// The average power budget cannot satisfy the outage constraint.
    /// `p_min` is `+inf` when the inversion integral diverges.
    #[error("infeasible: average power {p_av} is below the minimum power {p_min}")]
    InfeasiblePower { p_av: f64, p_min: f64 },

    #[error("no outage set of the discrete instance fits the power budget {p_av}")]
    InfeasibleDiscrete { p_av: f64 },

    #[error("{path}:{line}: {msg}")]
    Config {
        path: String,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }
}
