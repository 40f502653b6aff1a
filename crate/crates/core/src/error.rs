use thiserror::Error;

/// Errors produced anywhere in the ENF pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("harmonic order {order} band [{low_hz:.3}, {high_hz:.3}] Hz lies outside the spectrum (0..{nyquist_hz:.3} Hz)")]
    BandOutsideSpectrum {
        order: u32,
        low_hz: f64,
        high_hz: f64,
        nyquist_hz: f64,
    },

    #[error("insufficient quorum: {have} proofs in pool, scoring needs at least {need}")]
    InsufficientQuorum { have: usize, need: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by the caller's configuration, arguments or
    /// input documents rather than by processing.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_) | Error::Config(_) | Error::InsufficientQuorum { .. } | Error::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
