/// Crate-wide error type.
///
/// `Config` is a rejected parameter combination; `Guard` is a state-space or
/// budget cap that protects against runaway computations. The CLI maps them
/// to exit codes 2 and 3 respectively.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("guard violated: {0}")]
    Guard(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn guard(msg: impl Into<String>) -> Self {
        Error::Guard(msg.into())
    }
}
