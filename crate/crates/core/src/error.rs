use thiserror::Error;

/// Errors produced by the analysis library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no sign change on bracket [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("invalid distance {0} m: the channel model requires d > 0")]
    InvalidDistance(f64),
    #[error("degenerate deployment: repeaters {0} and {1} coincide")]
    DegenerateDeployment(usize, usize),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("structure error: {0}")]
    Structure(String),
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// True for failures of the numerical machinery itself, as opposed to
    /// rejected inputs or configurations.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Dimension(_) | Error::Bracket { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
