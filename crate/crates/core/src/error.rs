use thiserror::Error;

/// Errors shared across the crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A requested truncation or threshold lies below the resolution at
    /// which a path was simulated, so the operation is not representable.
    #[error("precision error: {0}")]
    Precision(String),

    /// Parameter combination outside the hypotheses of the estimate being
    /// verified (e.g. kappa/b regime mismatch).
    #[error("regime error: {0}")]
    Regime(String),

    #[error("quadrature did not reach the requested tolerance: achieved {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    /// The backward flow ran out of driver before reaching the target height.
    #[error("horizon {horizon} exhausted before the flow reached height {target}")]
    Horizon { horizon: f64, target: f64 },

    /// Level budget exhausted before the comb limit value stabilized.
    #[error("needs deeper level: {0}")]
    NeedsDeeperLevel(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
