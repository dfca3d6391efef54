use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The request is well-formed but exceeds a size cap of the operation.
    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("inadmissible field h = {h}: {b}*h lies within {margin:e} of the integer {a}")]
    InadmissibleField { h: f64, a: i64, b: u64, margin: f64 },

    #[error("residual {residual:e} exceeds the bound {bound:e} in {mode} precision")]
    Precision {
        residual: f64,
        bound: f64,
        mode: String,
    },

    #[error("event budget exceeded: about {estimated:e} events needed, limit {limit:e}")]
    Budget { estimated: f64, limit: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn capability(msg: impl Into<String>) -> Self {
        Error::Capability(msg.into())
    }
}
