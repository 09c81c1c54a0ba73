//! Action-inference gateway: a small HTTP server that turns observations
//! into action chunks, plus the pieces needed to exercise it end to end.
//!
//! The wire contract is a single `POST /v1/act` route taking a prompt,
//! a proprioceptive state and base64-encoded camera views, answering
//! with a `chunk_size x dof` action matrix (`GET /v1/health` reports
//! liveness). Backends implement [`PolicyBackend`] and must be stateless
//! and deterministic; the gateway enforces the response contract (shape,
//! finiteness) on their behalf and maps every failure to a machine-
//! readable error code. Images are opaque to the gateway: they are
//! base64-validated and surfaced to backends as [`ImageMeta`] only.
//!
//! Three reference backends ship in-tree: `zero` (constant zeros),
//! `pcontrol` (a proportional controller parsing `"reach X Y"` prompts)
//! and `replay` (serves a recorded, quantized action chunk). [`ToyEnv`]
//! is a bounded 2-D point mass for closed-loop tests, and [`run_rollout`]
//! drives it against a live gateway over HTTP, optionally recording the
//! trajectory as JSON Lines.

mod backend;
mod env;
mod error;
mod request;
mod rollout;
mod server;

pub use backend::{
    read_replay_file, write_replay_file, PControlBackend, PolicyBackend, ReplayBackend,
    ZeroBackend, DEFAULT_ZERO_DOF,
};
pub use env::{ToyEnv, DEFAULT_MAX_STEP, DEFAULT_SUCCESS_RADIUS, ENV_BOUND, RENDER_SIZE};
pub use error::{BackendError, ServeError};
pub use request::{
    validate_act_request, ActInputs, ImageMeta, RequestError, DEFAULT_CHUNK_SIZE, MAX_CHUNK_SIZE,
};
pub use rollout::{run_rollout, RolloutOptions, RolloutResult, TrajectoryStep};
pub use server::{serve, ServerHandle};
