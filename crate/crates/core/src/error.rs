use crate::types::Scenario;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("carrier frequency {0} GHz outside the supported range [0.5, 150] GHz")]
    FrequencyOutOfRange(f64),

    #[error("2D distance {0} m is below the 1 m reference distance")]
    BelowReferenceDistance(f64),

    #[error("{operation} does not support scenario {scenario}")]
    UnsupportedScenario {
        scenario: Scenario,
        operation: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("parameter file: {0}")]
    ParamFile(String),

    #[error("atmosphere table: {0}")]
    AtmosphereTable(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    /// True for errors caused by user-supplied configuration or data files
    /// rather than by the simulation itself.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::ParamFile(_)
                | Error::AtmosphereTable(_)
                | Error::FrequencyOutOfRange(_)
                | Error::InvalidParameter(_)
        )
    }
}
