use thiserror::Error;

/// Errors produced by the tailscore library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distribution construction failed: {0}")]
    Construction(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("root not bracketed on [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("monotonicity check failed: {0}")]
    Monotonicity(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("grid too large: {points} points exceeds guard of {guard}")]
    GridGuard { points: u128, guard: u128 },

    #[error("unknown registry name `{0}`")]
    UnknownName(String),

    #[error("input error at line {line}: {message}")]
    Input { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
