use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} = {value} is outside the domain [{lo}, {hi}]")]
    OutOfDomain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: missing required key `{key}` in {section}")]
    MissingKey {
        line: usize,
        key: String,
        section: String,
    },

    #[error("degenerate constraints: boundary block condition estimate {cond:.3e} exceeds {limit:.0e}")]
    DegenerateConstraints { cond: f64, limit: f64 },

    #[error("no propagating modes with phase speed <= {cp_max_mps} m/s")]
    NoPropagatingModes { cp_max_mps: f64 },

    #[error("degenerate mode {index}: normalization integral magnitude {magnitude:.3e}")]
    DegenerateMode { index: usize, magnitude: f64 },

    #[error("eigenvalue iteration did not converge for a {n}x{n} matrix")]
    NumericalFailure { n: usize },

    #[error("{0}")]
    Io(String),

    #[error("usage: {0}")]
    Usage(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
