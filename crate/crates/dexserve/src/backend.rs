use std::fs;
use std::path::Path;

use dexaction::{ActionChunk, ActionSpace};
use serde::Deserialize;

use crate::error::{BackendError, ServeError};
use crate::request::ActInputs;

/// A policy that turns one observation into a `chunk_size x dof` action
/// matrix. Implementations must be stateless and deterministic: the same
/// inputs always produce the same matrix, and concurrent calls must not
/// observe each other.
pub trait PolicyBackend: Send + Sync {
    /// Stable name, echoed in responses and error bodies.
    fn name(&self) -> &str;

    /// Number of action dimensions per step.
    fn dof(&self) -> usize;

    /// Produce `inputs.chunk_size` rows of `dof()` values each.
    fn act(&self, inputs: &ActInputs) -> Result<Vec<Vec<f64>>, BackendError>;
}

/// Always answers with zeros. Useful as a liveness probe and as the
/// "never succeeds" control in rollout experiments.
#[derive(Debug, Clone)]
pub struct ZeroBackend {
    dof: usize,
}

/// Action dimensionality of [`ZeroBackend`] when none is requested.
pub const DEFAULT_ZERO_DOF: usize = 7;

impl ZeroBackend {
    pub fn new(dof: usize) -> Result<Self, ServeError> {
        if dof == 0 {
            return Err(ServeError::BackendConfig(
                "zero backend needs at least one action dimension".to_owned(),
            ));
        }
        Ok(ZeroBackend { dof })
    }
}

impl Default for ZeroBackend {
    fn default() -> Self {
        ZeroBackend {
            dof: DEFAULT_ZERO_DOF,
        }
    }
}

impl PolicyBackend for ZeroBackend {
    fn name(&self) -> &str {
        "zero"
    }

    fn dof(&self) -> usize {
        self.dof
    }

    fn act(&self, inputs: &ActInputs) -> Result<Vec<Vec<f64>>, BackendError> {
        Ok(vec![vec![0.0; self.dof]; inputs.chunk_size])
    }
}

/// Proportional controller over a 2-D position. The goal comes from the
/// prompt (`"reach X Y"`), the current position from the first two state
/// values. The chunk is rolled out open loop: each step moves the
/// predicted position by `k * (goal - position)`, optionally clipped to
/// a maximum Euclidean step length, and the next step starts from there.
#[derive(Debug, Clone)]
pub struct PControlBackend {
    k: f64,
    clip: Option<f64>,
}

impl PControlBackend {
    /// `k` must be finite and positive; `clip`, when given, too.
    pub fn new(k: f64, clip: Option<f64>) -> Result<Self, ServeError> {
        if !k.is_finite() || k <= 0.0 {
            return Err(ServeError::BackendConfig(format!(
                "proportional gain must be finite and positive, got {k}"
            )));
        }
        if let Some(c) = clip {
            if !c.is_finite() || c <= 0.0 {
                return Err(ServeError::BackendConfig(format!(
                    "step clip must be finite and positive, got {c}"
                )));
            }
        }
        Ok(PControlBackend { k, clip })
    }
}

impl Default for PControlBackend {
    /// Unit gain, no step clipping.
    fn default() -> Self {
        PControlBackend { k: 1.0, clip: None }
    }
}

/// Extract the goal from a `"reach X Y"` prompt.
fn parse_reach_prompt(prompt: &str) -> Result<[f64; 2], BackendError> {
    let bad = || {
        BackendError(format!(
            "pcontrol understands prompts of the form \"reach X Y\", got {prompt:?}"
        ))
    };
    let rest = prompt.trim().strip_prefix("reach ").ok_or_else(bad)?;
    let mut parts = rest.split_whitespace();
    let gx: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    let gy: f64 = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
    if parts.next().is_some() || !gx.is_finite() || !gy.is_finite() {
        return Err(bad());
    }
    Ok([gx, gy])
}

impl PolicyBackend for PControlBackend {
    fn name(&self) -> &str {
        "pcontrol"
    }

    fn dof(&self) -> usize {
        2
    }

    fn act(&self, inputs: &ActInputs) -> Result<Vec<Vec<f64>>, BackendError> {
        let goal = parse_reach_prompt(&inputs.prompt)?;
        if inputs.state.len() < 2 {
            return Err(BackendError(format!(
                "pcontrol needs at least two state values (x, y), got {}",
                inputs.state.len()
            )));
        }
        let mut pos = [inputs.state[0], inputs.state[1]];
        let mut actions = Vec::with_capacity(inputs.chunk_size);
        for _ in 0..inputs.chunk_size {
            let mut delta = [self.k * (goal[0] - pos[0]), self.k * (goal[1] - pos[1])];
            if let Some(clip) = self.clip {
                let norm = f64::hypot(delta[0], delta[1]);
                if norm > clip {
                    let scale = clip / norm;
                    delta = [delta[0] * scale, delta[1] * scale];
                }
            }
            pos = [pos[0] + delta[0], pos[1] + delta[1]];
            actions.push(delta.to_vec());
        }
        Ok(actions)
    }
}

/// Serves a pre-recorded action chunk, decoded from quantized tokens.
/// `request_id`, when present, is parsed as an integer frame offset into
/// the recording; reads past the end repeat the last step.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    chunk: ActionChunk,
}

impl ReplayBackend {
    pub fn new(chunk: ActionChunk) -> Self {
        ReplayBackend { chunk }
    }

    /// Load a recording written by [`write_replay_file`].
    pub fn from_file(path: &Path) -> Result<Self, ServeError> {
        Ok(ReplayBackend::new(read_replay_file(path)?))
    }
}

impl PolicyBackend for ReplayBackend {
    fn name(&self) -> &str {
        "replay"
    }

    fn dof(&self) -> usize {
        self.chunk.space().dims()
    }

    fn act(&self, inputs: &ActInputs) -> Result<Vec<Vec<f64>>, BackendError> {
        let offset: usize = match &inputs.request_id {
            None => 0,
            Some(id) => id.parse().map_err(|_| {
                BackendError(format!(
                    "replay expects request_id to be an integer frame offset, got {id:?}"
                ))
            })?,
        };
        let steps = self.chunk.steps();
        let last = steps.len() - 1;
        let actions = (0..inputs.chunk_size)
            .map(|i| steps[(offset + i).min(last)].clone())
            .collect();
        Ok(actions)
    }
}

/// On-disk form of a recorded chunk: the action space plus the quantized
/// token matrix, as one canonical JSON document.
#[derive(Deserialize)]
struct ReplayFile {
    space: ActionSpace,
    tokens: Vec<Vec<u16>>,
}

/// Persist a chunk as quantized tokens next to its action space.
pub fn write_replay_file(path: &Path, chunk: &ActionChunk) -> Result<(), ServeError> {
    let doc = serde_json::json!({
        "space": chunk.space(),
        "tokens": chunk.quantize(),
    });
    let mut text = serde_json::to_string(&doc).expect("replay document serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Load and decode a recorded chunk, re-validating space and tokens.
pub fn read_replay_file(path: &Path) -> Result<ActionChunk, ServeError> {
    let bad = |detail: String| ServeError::BadReplayFile {
        path: path.to_owned(),
        detail,
    };
    let text = fs::read_to_string(path)?;
    let file: ReplayFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    ActionChunk::from_tokens(file.space, &file.tokens).map_err(|e| bad(e.to_string()))
}
