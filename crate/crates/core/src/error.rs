use thiserror::Error;

/// Everything that can go wrong inside the engine.
///
/// The variants line up with the exit statuses of the command-line front
/// end: input problems, resource caps, and runtime consistency failures are
/// kept apart so callers can react differently.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("conditioning error: {0}")]
    Conditioning(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}

macro_rules! ensure_input {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::error::Error::Input(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_input;
