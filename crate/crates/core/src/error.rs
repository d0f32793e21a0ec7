use thiserror::Error;

/// Errors raised by configuration validation and the simulation pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("alpha == beta requires a1 > a2 (got a1 = {a1}, a2 = {a2})")]
    TrivialCaching { a1: f64, a2: f64 },

    #[error("1 - (alpha - beta) - eta_margin = {0} < 0: cache-starved regime, every scheme is in outage")]
    OutageRegime(f64),

    #[error("improved scheme requires gamma > 1 + 1/alpha = {threshold} (got gamma = {gamma})")]
    ImprovedSchemeUnavailable { gamma: f64, threshold: f64 },

    #[error("cache size {cache} exceeds library size {library}")]
    CacheTooLarge { cache: u64, library: u64 },

    #[error("total cache capacity n*M = {capacity} cannot cover m = {library} files")]
    InsufficientCapacity { capacity: u64, library: u64 },

    #[error("k = {k} outside [0, l*p = {lp}]")]
    ChernoffDomain { k: f64, lp: f64 },

    #[error("scaling fit: {0}")]
    Fit(String),

    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },

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

impl Error {
    /// True for errors caused by the configuration rather than by running it.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::TrivialCaching { .. }
                | Error::OutageRegime(_)
                | Error::ImprovedSchemeUnavailable { .. }
                | Error::CacheTooLarge { .. }
                | Error::InsufficientCapacity { .. }
                | Error::Parse { .. }
        )
    }
}
