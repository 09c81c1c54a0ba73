//! The `dexctl` command line: one binary over the whole toolbox.
//!
//! Subcommands map onto the library crates:
//!
//! - `validate`, `index`, `convert`, `stats` — dataset lifecycle
//!   (dexdata + dexconvert), including the stub codec exposed as
//!   `stub-encode` / `stub-decode` for encoder-free environments.
//! - `config-resolve`, `run` — experiment configs (dexconfig) and the
//!   factory-driven task dispatch built on top of them.
//! - `serve`, `rollout` — the HTTP action gateway and the toy
//!   environment loop (dexserve).
//! - `probe-mp4` — container inspection without decoding (dexmp4).
//!
//! Two global flags shape all output: `--json` prints one canonical
//! JSON document on stdout (diagnostics only ever go to stderr), and
//! `--quiet` suppresses the human summary. Exit codes are uniform:
//! 0 success, 1 validation failure, 2 usage error, 3 i/o or external
//! failure.

pub mod cli;
pub mod commands;
pub mod dispatch;
pub mod error;

pub use cli::{Cli, Command};
pub use commands::{execute, CommandOutput, Output};
pub use dispatch::{
    backend_factory, builtin_registry, dispatch_task, BackendFn, BackendParams, EpisodeRecord,
    Factory, ReaderFn, TaskOutcome, TrainReport, TrainerFn,
};
pub use error::CliError;
