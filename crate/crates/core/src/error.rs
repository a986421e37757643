use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("scenario has no devices")]
    EmptyDeviceList,

    #[error("parameter `{0}` must be positive")]
    NonPositiveParameter(String),

    #[error("link distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("shared-beam group is empty")]
    EmptySubset,

    #[error("offloading profile is empty")]
    EmptyProfile,

    #[error("beam budget must be at least 1, got {0}")]
    InvalidBudget(usize),

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("sweep value {sweep_value}, trial {trial}: {source}")]
    Trial {
        sweep_value: f64,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

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

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidSpec(e.to_string())
    }
}
