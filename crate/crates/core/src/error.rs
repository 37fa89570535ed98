use crate::config::ConfigError;

/// Errors raised by the particle solver and the optimizer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite particle state at step {step}")]
    NonFiniteState { step: usize },
    #[error("non-finite adjoint state at step {step}")]
    NonFiniteAdjoint { step: usize },
    #[error("non-finite control iterate at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}
