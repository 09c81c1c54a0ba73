use dexconfig::{ConfigError, RegistryError};
use dexconvert::ConvertError;
use dexdata::DexdataError;
use dexmp4::Mp4Error;
use dexserve::ServeError;
use thiserror::Error;

/// A command failure, already classified onto the exit-code contract:
/// 1 validation failure, 2 usage error, 3 i/o or external failure
/// (0 is success and never an error).
#[derive(Debug, Error)]
pub enum CliError {
    /// The invocation itself is malformed: bad flag values, malformed
    /// templates or overrides, unknown tasks.
    #[error("{0}")]
    Usage(String),

    /// The inputs were read fine but failed validation: broken datasets,
    /// unparseable media, config conflicts, contract violations.
    #[error("{0}")]
    Invalid(String),

    /// The world outside misbehaved: filesystem errors, failing external
    /// encoders, unreachable servers, occupied ports.
    #[error("{0}")]
    External(String),
}

impl CliError {
    /// Process exit code for this failure class.
    pub fn code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Usage(_) => 2,
            CliError::External(_) => 3,
        }
    }
}

impl From<DexdataError> for CliError {
    fn from(e: DexdataError) -> Self {
        match e {
            DexdataError::Io { .. } => CliError::External(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<Mp4Error> for CliError {
    fn from(e: Mp4Error) -> Self {
        match e {
            Mp4Error::Io(_) => CliError::External(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => CliError::External(e.to_string()),
            // A malformed --set is the caller's command line, not data.
            ConfigError::BadOverride(_) => CliError::Usage(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<RegistryError> for CliError {
    fn from(e: RegistryError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<ConvertError> for CliError {
    fn from(e: ConvertError) -> Self {
        match e {
            ConvertError::Io { .. } => CliError::External(e.to_string()),
            ConvertError::EncoderFailed { .. } => CliError::External(e.to_string()),
            ConvertError::BadTemplate(_) => CliError::Usage(e.to_string()),
            ConvertError::Data(inner) => inner.into(),
            ConvertError::Mp4 { ref source, .. } => match source {
                Mp4Error::Io(_) => CliError::External(e.to_string()),
                _ => CliError::Invalid(e.to_string()),
            },
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ServeError> for CliError {
    fn from(e: ServeError) -> Self {
        match e {
            ServeError::Io(_)
            | ServeError::PortInUse(_)
            | ServeError::Startup(_)
            | ServeError::ServerUnreachable { .. }
            | ServeError::BadResponse { .. }
            | ServeError::Recording { .. } => CliError::External(e.to_string()),
            // Backend parameters come straight from flags or config.
            ServeError::BackendConfig(_) => CliError::Usage(e.to_string()),
            ServeError::BadReplayFile { .. }
            | ServeError::Env(_)
            | ServeError::NonFiniteAction { .. } => CliError::Invalid(e.to_string()),
        }
    }
}
