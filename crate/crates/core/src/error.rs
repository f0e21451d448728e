use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("coefficient domain error: {0}")]
    CoefficientDomain(String),
    #[error("boundary classification inconclusive at {endpoint}: N = {n:e}, Sigma = {sigma:e}")]
    Inconclusive { endpoint: String, n: f64, sigma: f64 },
    #[error("catalog error: {0}")]
    Catalog(String),
    #[error("series truncation error: tail estimate {tail:e} after {terms} terms")]
    Truncation { terms: usize, tail: f64 },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("boundary assumption violated: {0}")]
    BoundaryAssumption(String),
    #[error("divergent integral: {0}")]
    Divergent(String),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

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
