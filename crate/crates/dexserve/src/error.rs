use std::net::SocketAddr;
use std::path::PathBuf;

use thiserror::Error;

/// Failure raised by a policy backend while producing an action chunk.
/// The gateway maps it to an HTTP 500 with code `BACKEND_ERROR`.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct BackendError(pub String);

/// Errors from the gateway lifecycle, the toy environment and the
/// rollout client.
#[derive(Debug, Error)]
pub enum ServeError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// The requested listen address is already taken.
    #[error("address {0} is already in use")]
    PortInUse(SocketAddr),

    /// The server thread died before reporting its listen address.
    #[error("server failed to start: {0}")]
    Startup(String),

    /// A backend was constructed with invalid parameters.
    #[error("bad backend configuration: {0}")]
    BackendConfig(String),

    /// A recorded action-chunk file could not be loaded.
    #[error("bad replay file {path}: {detail}")]
    BadReplayFile { path: PathBuf, detail: String },

    /// The toy environment rejected a state or an action.
    #[error("environment error: {0}")]
    Env(String),

    /// The rollout client could not reach the gateway at all.
    #[error("server unreachable at {url}: {detail}")]
    ServerUnreachable { url: String, detail: String },

    /// The gateway answered, but not with a usable action chunk.
    #[error("bad response from {url}: {detail}")]
    BadResponse { url: String, detail: String },

    /// A served action contained a NaN or infinity at rollout step `t`.
    #[error("non-finite action at rollout step {t}")]
    NonFiniteAction { t: u64 },

    /// The trajectory recording could not be written.
    #[error("cannot record trajectory to {path}: {source}")]
    Recording {
        path: PathBuf,
        source: std::io::Error,
    },
}
