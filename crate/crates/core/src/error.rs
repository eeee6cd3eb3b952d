use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Evaluation point coincides with an atom; `sign` is the sign of the
    /// atom weight, i.e. the sign of the infinity the potential tends to.
    #[error("pole at ({x}, {y}): atom of weight sign {sign}")]
    Pole { x: f64, y: f64, sign: i8 },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },

    #[error("radius {radius} is below the resolution limit {limit}")]
    Unresolved { radius: f64, limit: f64 },

    #[error("no admissible test circle in region")]
    EmptyRegion,

    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
