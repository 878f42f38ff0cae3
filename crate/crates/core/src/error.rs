use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("sub-threshold slope undefined: equal currents at {v1} V and {v2} V")]
    UndefinedSlope { v1: f64, v2: f64 },

    #[error("unknown cell `{cell}` in inventory `{module}`")]
    UnknownCell { module: String, cell: String },

    #[error("unknown inventory `{0}`")]
    UnknownInventory(String),

    #[error("division by a zero reference estimate for `{0}`")]
    ZeroReference(String),

    #[error("reference row not covered by computed table: {0}")]
    Coverage(String),

    #[error("KATAN state exhausted: all 254 rounds already applied")]
    StateExhausted,

    #[error("stats not comparable: retired {healthy} vs {infected}")]
    NotComparable { healthy: u64, infected: u64 },

    #[error("invalid parameters: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
