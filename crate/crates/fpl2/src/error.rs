use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n = {0} lies outside the critical range |n| <= 2")]
    OutOfRange(f64),

    #[error("invalid argument: {0}")]
    Domain(String),

    #[error("degenerate coefficient: {0}")]
    Degenerate(String),

    #[error("dimension {dim} exceeds the cap {cap}")]
    TooLarge { dim: usize, cap: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            Error::OutOfRange(_) | Error::Domain(_) | Error::Degenerate(_) | Error::TooLarge { .. } => 3,
            Error::Singular(_) | Error::NoConvergence(_) => 4,
        }
    }
}
