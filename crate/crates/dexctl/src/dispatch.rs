use std::collections::BTreeSet;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dexconfig::{FactoryKind, FactoryRegistry, ResolvedConfig};
use dexdata::{parse_frame_line, scan_dataset, DatasetLayout, EpisodeMeta};
use dexserve::{PControlBackend, PolicyBackend, ReplayBackend, ServerHandle, ZeroBackend};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// Everything a policy-backend factory may consume. Fields the chosen
/// backend does not use are simply ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BackendParams {
    /// Action dimensions (zero backend).
    pub dof: Option<usize>,
    /// Proportional gain (pcontrol backend).
    pub k: Option<f64>,
    /// Per-step norm clip (pcontrol backend).
    pub clip: Option<f64>,
    /// Recording to replay (replay backend).
    pub chunk: Option<PathBuf>,
}

impl BackendParams {
    /// Read backend parameters from the `inference` section of a
    /// resolved config.
    pub fn from_config(config: &ResolvedConfig) -> Result<Self, CliError> {
        Ok(BackendParams {
            dof: config_usize(config, "inference.dof")?,
            k: config_f64(config, "inference.k")?,
            clip: config_f64(config, "inference.clip")?,
            chunk: config_string(config, "inference.chunk")?.map(PathBuf::from),
        })
    }

    /// Build parameters from `--dof` plus repeated `--backend-arg`
    /// `key=value` pairs. Known keys: `k`, `clip`, `chunk`.
    pub fn from_args(dof: Option<usize>, args: &[String]) -> Result<Self, CliError> {
        let mut params = BackendParams {
            dof,
            ..BackendParams::default()
        };
        for arg in args {
            let (key, value) = arg.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("--backend-arg '{arg}' is not of the form key=value"))
            })?;
            match key {
                "k" => params.k = Some(parse_f64_arg(key, value)?),
                "clip" => params.clip = Some(parse_f64_arg(key, value)?),
                "chunk" => params.chunk = Some(PathBuf::from(value)),
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown backend argument '{other}', expected k, clip or chunk"
                    )))
                }
            }
        }
        Ok(params)
    }
}

fn parse_f64_arg(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("backend argument {key}='{value}' is not a number")))
}

fn config_f64(config: &ResolvedConfig, path: &str) -> Result<Option<f64>, CliError> {
    match config.get(path) {
        None => Ok(None),
        Some(v) => v.as_f64().map(Some).ok_or_else(|| {
            CliError::Invalid(format!("config field {path} must be a number, got {v}"))
        }),
    }
}

fn config_usize(config: &ResolvedConfig, path: &str) -> Result<Option<usize>, CliError> {
    match config.get(path) {
        None => Ok(None),
        Some(v) => v.as_u64().map(|n| Some(n as usize)).ok_or_else(|| {
            CliError::Invalid(format!(
                "config field {path} must be a non-negative integer, got {v}"
            ))
        }),
    }
}

fn config_string(config: &ResolvedConfig, path: &str) -> Result<Option<String>, CliError> {
    match config.get(path) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(v) => Err(CliError::Invalid(format!(
            "config field {path} must be a string, got {v}"
        ))),
    }
}

/// One validated episode as handed to trainers: metadata plus the
/// per-frame state and optional action vectors, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub meta: EpisodeMeta,
    pub states: Vec<Vec<f64>>,
    pub actions: Option<Vec<Vec<f64>>>,
}

pub type ReaderFn = fn(&Path) -> Result<Vec<EpisodeRecord>, CliError>;
pub type TrainerFn = fn(ReaderFn, &Path) -> Result<TrainReport, CliError>;
pub type BackendFn = fn(&BackendParams) -> Result<Arc<dyn PolicyBackend>, CliError>;

/// A registered constructor. The registry stores these under
/// `(kind, name)`; the kind decides which variant to expect.
#[derive(Debug, Clone, Copy)]
pub enum Factory {
    Backend(BackendFn),
    Trainer(TrainerFn),
    Reader(ReaderFn),
}

/// What one pass of a trainer stub learned about its dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub num_episodes: u64,
    pub num_frames: u64,
    /// Frames carrying an `"action"` vector.
    pub num_action_frames: u64,
    /// Distinct state dimensionalities seen, sorted.
    pub state_dims: Vec<usize>,
    /// Distinct action dimensionalities seen, sorted.
    pub action_dims: Vec<usize>,
    /// Mean absolute value over every state scalar.
    pub mean_abs_state: f64,
}

/// Outcome of [`dispatch_task`]: either a finished training pass or a
/// gateway that is now serving.
#[derive(Debug)]
pub enum TaskOutcome {
    Trained(TrainReport),
    Serving {
        backend: String,
        handle: ServerHandle,
    },
}

/// The built-in factories:
///
/// | kind            | names                    |
/// |-----------------|--------------------------|
/// | policy_backend  | pcontrol, replay, zero   |
/// | trainer_stub    | stats                    |
/// | dataset_reader  | dexdata                  |
pub fn builtin_registry() -> FactoryRegistry<Factory> {
    let mut registry = FactoryRegistry::new();
    let builtins: [(FactoryKind, &str, Factory); 5] = [
        (FactoryKind::PolicyBackend, "zero", Factory::Backend(make_zero)),
        (FactoryKind::PolicyBackend, "pcontrol", Factory::Backend(make_pcontrol)),
        (FactoryKind::PolicyBackend, "replay", Factory::Backend(make_replay)),
        (FactoryKind::TrainerStub, "stats", Factory::Trainer(stats_trainer)),
        (FactoryKind::DatasetReader, "dexdata", Factory::Reader(read_dexdata)),
    ];
    for (kind, name, factory) in builtins {
        registry
            .register(kind, name, factory)
            .expect("builtin names are unique");
    }
    registry
}

/// Look up a policy-backend constructor by name.
pub fn backend_factory(
    registry: &FactoryRegistry<Factory>,
    name: &str,
) -> Result<BackendFn, CliError> {
    match registry.lookup(FactoryKind::PolicyBackend, name)? {
        Factory::Backend(f) => Ok(*f),
        _ => Err(CliError::Invalid(format!(
            "'{name}' is not registered as a policy_backend"
        ))),
    }
}

fn trainer_factory(
    registry: &FactoryRegistry<Factory>,
    name: &str,
) -> Result<TrainerFn, CliError> {
    match registry.lookup(FactoryKind::TrainerStub, name)? {
        Factory::Trainer(f) => Ok(*f),
        _ => Err(CliError::Invalid(format!(
            "'{name}' is not registered as a trainer_stub"
        ))),
    }
}

fn reader_factory(
    registry: &FactoryRegistry<Factory>,
    name: &str,
) -> Result<ReaderFn, CliError> {
    match registry.lookup(FactoryKind::DatasetReader, name)? {
        Factory::Reader(f) => Ok(*f),
        _ => Err(CliError::Invalid(format!(
            "'{name}' is not registered as a dataset_reader"
        ))),
    }
}

/// Execute the task a resolved config asks for.
///
/// - `train`: build the `data.reader` (default `dexdata`), hand it to
///   the `trainer.name` stub (default `stats`) together with
///   `data.root`, and return the report.
/// - `infer`: build the `inference.backend` (default `zero`) from the
///   `inference` section and serve it on `127.0.0.1:{inference.port}`
///   (default 0 = pick a free port).
///
/// Anything else is an unknown task.
pub fn dispatch_task(
    config: &ResolvedConfig,
    task: &str,
    registry: &FactoryRegistry<Factory>,
) -> Result<TaskOutcome, CliError> {
    match task {
        "train" => {
            let reader_name =
                config_string(config, "data.reader")?.unwrap_or_else(|| "dexdata".to_owned());
            let trainer_name =
                config_string(config, "trainer.name")?.unwrap_or_else(|| "stats".to_owned());
            let root = config_string(config, "data.root")?.ok_or_else(|| {
                CliError::Invalid(
                    "the train task needs data.root to point at a dataset".to_owned(),
                )
            })?;
            let read = reader_factory(registry, &reader_name)?;
            let train = trainer_factory(registry, &trainer_name)?;
            Ok(TaskOutcome::Trained(train(read, Path::new(&root))?))
        }
        "infer" => {
            let backend_name =
                config_string(config, "inference.backend")?.unwrap_or_else(|| "zero".to_owned());
            let port = match config_usize(config, "inference.port")? {
                None => 0,
                Some(p) => u16::try_from(p).map_err(|_| {
                    CliError::Invalid(format!("inference.port {p} does not fit a tcp port"))
                })?,
            };
            let params = BackendParams::from_config(config)?;
            let make = backend_factory(registry, &backend_name)?;
            let backend = make(&params)?;
            let addr = SocketAddr::from(([127, 0, 0, 1], port));
            let handle = dexserve::serve(addr, backend)?;
            Ok(TaskOutcome::Serving {
                backend: backend_name,
                handle,
            })
        }
        other => Err(CliError::Usage(format!(
            "unknown task '{other}', expected train or infer"
        ))),
    }
}

fn make_zero(params: &BackendParams) -> Result<Arc<dyn PolicyBackend>, CliError> {
    let backend = match params.dof {
        Some(dof) => ZeroBackend::new(dof)?,
        None => ZeroBackend::default(),
    };
    Ok(Arc::new(backend))
}

fn make_pcontrol(params: &BackendParams) -> Result<Arc<dyn PolicyBackend>, CliError> {
    Ok(Arc::new(PControlBackend::new(
        params.k.unwrap_or(1.0),
        params.clip,
    )?))
}

fn make_replay(params: &BackendParams) -> Result<Arc<dyn PolicyBackend>, CliError> {
    let path = params.chunk.as_ref().ok_or_else(|| {
        CliError::Usage("the replay backend needs chunk=PATH pointing at a recording".to_owned())
    })?;
    Ok(Arc::new(ReplayBackend::from_file(path)?))
}

/// Built-in `dexdata` reader: scan the dataset, require every episode
/// to validate, then parse every frame line.
fn read_dexdata(root: &Path) -> Result<Vec<EpisodeRecord>, CliError> {
    let layout = DatasetLayout::new(root);
    let scan = scan_dataset(&layout)?;
    let mut records = Vec::new();
    for validation in &scan.validations {
        let meta = match &validation.meta {
            Some(meta) => meta.clone(),
            None => {
                return Err(CliError::Invalid(format!(
                    "episode fails validation:\n{}",
                    validation.report
                )))
            }
        };
        let path = layout.resolve(&meta.jsonl_path);
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::External(format!("reading {}: {e}", path.display())))?;
        let mut states = Vec::new();
        let mut actions = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let frame = parse_frame_line(line).map_err(|e| {
                CliError::Invalid(format!("{} line {}: {e}", meta.jsonl_path, i + 1))
            })?;
            states.push(frame.state_f64());
            if let Some(Value::Array(nums)) = frame.extras().get("action") {
                actions.push(nums.iter().filter_map(Value::as_f64).collect());
            }
        }
        let actions = if actions.is_empty() { None } else { Some(actions) };
        records.push(EpisodeRecord {
            meta,
            states,
            actions,
        });
    }
    Ok(records)
}

/// Built-in `stats` trainer: one pass over the reader's episodes,
/// accumulating frame and action statistics.
fn stats_trainer(read: ReaderFn, root: &Path) -> Result<TrainReport, CliError> {
    let records = read(root)?;
    let mut num_frames = 0u64;
    let mut num_action_frames = 0u64;
    let mut state_dims = BTreeSet::new();
    let mut action_dims = BTreeSet::new();
    let mut abs_sum = 0.0f64;
    let mut num_scalars = 0u64;
    for record in &records {
        num_frames += record.states.len() as u64;
        state_dims.insert(record.meta.state_dim);
        if let Some(actions) = &record.actions {
            num_action_frames += actions.len() as u64;
        }
        if let Some(dim) = record.meta.action_dim {
            action_dims.insert(dim);
        }
        for state in &record.states {
            for x in state {
                abs_sum += x.abs();
                num_scalars += 1;
            }
        }
    }
    let mean_abs_state = if num_scalars == 0 {
        0.0
    } else {
        abs_sum / num_scalars as f64
    };
    Ok(TrainReport {
        num_episodes: records.len() as u64,
        num_frames,
        num_action_frames,
        state_dims: state_dims.into_iter().collect(),
        action_dims: action_dims.into_iter().collect(),
        mean_abs_state,
    })
}
