use thiserror::Error;

/// Errors raised across the library surface.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier `{name}` at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("zero pivot in tridiagonal elimination at row {row}")]
    ZeroPivot { row: usize },

    #[error("manufactured field violates v_xi(1,t) = 0 at t = {t} (slope {slope:e})")]
    NeumannViolation { t: f64, slope: f64 },

    #[error("no positive equilibrium front for c = {c}, sigma = {sigma} (requires c > sigma)")]
    NoEquilibrium { c: f64, sigma: f64 },

    #[error("front collapsed at t = {t}: s = {s:e} below guard")]
    FrontCollapse { t: f64, s: f64 },

    #[error("solution diverged at t = {t}: {reason}")]
    Diverged { t: f64, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
