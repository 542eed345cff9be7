use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate:e}, error {error:e})")]
    Accuracy {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("degenerate beam: own direction lies in the span of the interfering directions (residual {0:e})")]
    DegenerateBeam(f64),

    #[error("numeric consistency: {0}")]
    NumericConsistency(String),

    #[error("search space of {0} configurations exceeds the exhaustive limit")]
    SearchSpaceTooLarge(u128),

    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
