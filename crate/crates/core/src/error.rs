use thiserror::Error;

#[derive(Debug, Error)]
pub enum KdvError {
    /// Argument outside the mathematical domain of an operation (e.g. `K(1)`).
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid combination of inputs: wrong family, missing parameter, unsupported order.
    #[error("usage error: {0}")]
    Usage(String),

    /// A measurement on a simulated field could not be taken.
    #[error("measurement error: {0}")]
    Measurement(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl KdvError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        KdvError::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        KdvError::Usage(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, KdvError>;
