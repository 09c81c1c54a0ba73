use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::env::ToyEnv;
use crate::error::ServeError;
use crate::request::DEFAULT_CHUNK_SIZE;

/// How a rollout talks to a gateway and when it gives up.
#[derive(Debug, Clone)]
pub struct RolloutOptions {
    /// Gateway base URL, e.g. `http://127.0.0.1:8080`.
    pub url: String,
    /// Goal position the prompt asks for.
    pub goal: [f64; 2],
    /// Start position; ignored when `seed` is set.
    pub start: [f64; 2],
    /// Actions requested per gateway round trip.
    pub chunk_size: usize,
    /// Environment step budget before the rollout counts as failed.
    pub max_steps: u64,
    /// When set, the start position is drawn uniformly from `[-1, 1]^2`
    /// by a seeded generator, making the whole rollout reproducible.
    pub seed: Option<u64>,
    /// When set, the trajectory is written here as JSON Lines.
    pub record: Option<PathBuf>,
}

impl RolloutOptions {
    /// Defaults: start at the origin, chunks of 8, budget of 64 steps,
    /// no seed, no recording.
    pub fn new(url: impl Into<String>, goal: [f64; 2]) -> Self {
        RolloutOptions {
            url: url.into(),
            goal,
            start: [0.0, 0.0],
            chunk_size: DEFAULT_CHUNK_SIZE,
            max_steps: 64,
            seed: None,
            record: None,
        }
    }
}

/// One executed environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    /// Step index, starting at 0.
    pub t: u64,
    /// Position observed before the action was applied.
    pub state: Vec<f64>,
    /// Action as served by the gateway (pre-clipping).
    pub action: Vec<f64>,
}

/// Outcome of a rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutResult {
    pub success: bool,
    pub steps_taken: u64,
    pub trajectory: Vec<TrajectoryStep>,
}

/// Drive a [`ToyEnv`] against a gateway until success or the step budget
/// runs out. Each round trip sends the rendered arena plus the current
/// position and a `"reach X Y"` prompt, then executes the returned chunk
/// in order, stopping early on success. With a deterministic backend the
/// resulting trajectory — and any recording of it — is reproducible
/// byte for byte.
pub fn run_rollout(options: &RolloutOptions) -> Result<RolloutResult, ServeError> {
    let start = match options.seed {
        None => options.start,
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = rng.random_range(-1.0..1.0);
            let y = rng.random_range(-1.0..1.0);
            [x, y]
        }
    };
    let mut env = ToyEnv::new(start, options.goal)?;
    let prompt = format!("reach {} {}", options.goal[0], options.goal[1]);
    let act_url = format!("{}/v1/act", options.url.trim_end_matches('/'));
    let client = reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs(30))
        .build()
        .map_err(|e| ServeError::ServerUnreachable {
            url: options.url.clone(),
            detail: e.to_string(),
        })?;

    let mut trajectory: Vec<TrajectoryStep> = Vec::new();
    let mut steps_taken = 0u64;
    let mut success = env.is_success();

    'rollout: while !success && steps_taken < options.max_steps {
        let image = env.render();
        let state = env.state();
        let body = json!({
            "images": {
                "arena": {
                    "media_type": "image/x-portable-pixmap",
                    "data": BASE64.encode(&image),
                },
            },
            "prompt": prompt,
            "state": state,
            "chunk_size": options.chunk_size,
        });
        let actions = request_chunk(&client, &act_url, &options.url, &body)?;

        for action in actions {
            if !action.iter().all(|v| v.is_finite()) {
                return Err(ServeError::NonFiniteAction { t: steps_taken });
            }
            let observed = env.state();
            env.step(&action)?;
            trajectory.push(TrajectoryStep {
                t: steps_taken,
                state: observed,
                action,
            });
            steps_taken += 1;
            if env.is_success() {
                success = true;
                continue 'rollout;
            }
            if steps_taken >= options.max_steps {
                break;
            }
        }
    }

    if let Some(path) = &options.record {
        let mut text = String::new();
        for step in &trajectory {
            let line = json!({
                "action": step.action,
                "state": step.state,
                "t": step.t,
            });
            text.push_str(&line.to_string());
            text.push('\n');
        }
        fs::write(path, text).map_err(|source| ServeError::Recording {
            path: path.clone(),
            source,
        })?;
    }

    Ok(RolloutResult {
        success,
        steps_taken,
        trajectory,
    })
}

/// One `/v1/act` round trip, decoded into an action matrix.
fn request_chunk(
    client: &reqwest::blocking::Client,
    act_url: &str,
    base_url: &str,
    body: &Value,
) -> Result<Vec<Vec<f64>>, ServeError> {
    let bad = |detail: String| ServeError::BadResponse {
        url: base_url.to_owned(),
        detail,
    };

    let response = client.post(act_url).json(body).send().map_err(|e| {
        ServeError::ServerUnreachable {
            url: base_url.to_owned(),
            detail: e.to_string(),
        }
    })?;
    let status = response.status();
    let text = response.text().map_err(|e| bad(e.to_string()))?;
    if !status.is_success() {
        return Err(bad(format!("HTTP {status}: {text}")));
    }
    let payload: Value =
        serde_json::from_str(&text).map_err(|e| bad(format!("unparseable body: {e}")))?;
    let rows = payload
        .get("actions")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("response carries no actions array".to_owned()))?;
    if rows.is_empty() {
        return Err(bad("response carries an empty action chunk".to_owned()));
    }
    rows.iter()
        .map(|row| {
            row.as_array()
                .and_then(|vals| vals.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
                .ok_or_else(|| bad("actions must be an array of number arrays".to_owned()))
        })
        .collect()
}
