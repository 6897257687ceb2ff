use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("frequency {freq_ghz} GHz is outside the {lo_ghz}-{hi_ghz} GHz validity range")]
    OutOfBand { freq_ghz: f64, lo_ghz: f64, hi_ghz: f64 },

    /// A regulatory or protocol rule was violated.
    #[error("policy error: {0}")]
    Policy(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error(
        "eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e}, matrix norm {norm:e})"
    )]
    NoConvergence { sweeps: usize, off_norm: f64, norm: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("inconsistent numerology: {0}")]
    InconsistentNumerology(String),

    #[error("aggregation error: {0}")]
    Aggregation(String),

    /// Scenario or configuration violates a structural invariant.
    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
