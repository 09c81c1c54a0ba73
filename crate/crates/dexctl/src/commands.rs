use std::fmt::Write as _;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use dexconfig::{ConfigNode, NodeSet, ResolvedConfig};
use dexconvert::{
    build_index_cache, convert_episode, load_bundles, storage_report, stubenc, verify_roundtrip,
    DecoderCommand, EncoderCommand,
};
use dexdata::{scan_dataset, DatasetLayout};
use dexmp4::index_video;
use dexserve::{run_rollout, RolloutOptions, ServerHandle, MAX_CHUNK_SIZE};
use serde_json::{json, Value};

use crate::cli::Command;
use crate::dispatch::{backend_factory, builtin_registry, dispatch_task, BackendParams, TaskOutcome};
use crate::error::CliError;

/// One command's result in both shapes: the canonical JSON document
/// `--json` prints, and the human summary printed otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub document: Value,
    pub human: String,
}

/// Most commands finish; `serve` and `run --task infer` stay up until
/// the caller stops them through the handle.
#[derive(Debug)]
pub enum CommandOutput {
    Done(Output),
    Serving {
        output: Output,
        handle: ServerHandle,
    },
}

/// Execute one parsed command. Every failure is already classified
/// onto the exit-code contract by [`CliError`].
pub fn execute(command: Command) -> Result<CommandOutput, CliError> {
    match command {
        Command::Validate { dataset } => validate(&dataset),
        Command::Index { dataset, epoch } => index(&dataset, epoch),
        Command::Convert {
            src,
            dst,
            encoder,
            fps,
            decoder,
        } => convert(&src, &dst, &encoder, fps, decoder.as_deref()),
        Command::Stats { src, dataset } => stats(&src, &dataset),
        Command::ConfigResolve { exp, set } => config_resolve(&exp, &set),
        Command::Run { exp, task, set } => run(&exp, &task, &set),
        Command::Serve {
            port,
            backend,
            dof,
            backend_args,
        } => serve(port, &backend, dof, &backend_args),
        Command::Rollout {
            url,
            goal,
            start,
            chunk,
            max_steps,
            seed,
            record,
        } => rollout(url, &goal, &start, chunk, max_steps, seed, record),
        Command::ProbeMp4 { input, frame } => probe_mp4(&input, frame),
        Command::StubEncode {
            input_list,
            fps,
            output,
            limit_frames,
        } => stub_encode(&input_list, fps, &output, limit_frames),
        Command::StubDecode { input, output_dir } => stub_decode(&input, &output_dir),
    }
}

fn done(document: Value, human: String) -> Result<CommandOutput, CliError> {
    Ok(CommandOutput::Done(Output { document, human }))
}

fn validate(dataset: &Path) -> Result<CommandOutput, CliError> {
    let layout = DatasetLayout::new(dataset);
    let scan = scan_dataset(&layout)?;

    let failing: Vec<_> = scan
        .validations
        .iter()
        .filter(|v| !v.is_valid())
        .collect();
    if !failing.is_empty() {
        let mut message = format!(
            "{} of {} episodes failed validation:\n",
            failing.len(),
            scan.validations.len()
        );
        for validation in failing {
            message.push_str(&validation.report.to_string());
        }
        return Err(CliError::Invalid(message.trim_end().to_owned()));
    }

    let metas = scan.metas();
    let num_frames: u64 = metas.iter().map(|m| m.num_frames).sum();
    let warnings: Vec<String> = scan
        .reports()
        .iter()
        .flat_map(|r| {
            r.warnings()
                .map(move |w| format!("{}: {w}", r.jsonl_path))
        })
        .collect();

    let document = json!({
        "root": dataset.display().to_string(),
        "num_episodes": metas.len(),
        "num_frames": num_frames,
        "episodes": serde_json::to_value(&metas).expect("metas serialize"),
        "warnings": warnings,
    });

    let mut human = format!(
        "dataset OK: {} episodes, {num_frames} frames",
        metas.len()
    );
    for meta in &metas {
        let _ = write!(
            human,
            "\n  {}: {} frames, {} views, state dim {}",
            meta.jsonl_path,
            meta.num_frames,
            meta.video_paths.len(),
            meta.state_dim
        );
        if let Some(dim) = meta.action_dim {
            let _ = write!(human, ", action dim {dim}");
        }
    }
    for warning in &warnings {
        let _ = write!(human, "\n  warning: {warning}");
    }
    done(document, human)
}

fn index(dataset: &Path, epoch: Option<u64>) -> Result<CommandOutput, CliError> {
    let layout = DatasetLayout::new(dataset);
    let cache = build_index_cache(&layout, epoch)?;

    let document = json!({
        "path": layout.index_path().display().to_string(),
        "cache": serde_json::to_value(&cache).expect("cache serializes"),
    });

    let mut human = format!(
        "indexed {} episodes -> {}",
        cache.episodes.len(),
        layout.index_path().display()
    );
    for entry in &cache.episodes {
        let _ = write!(
            human,
            "\n  {}: {} frames, video frames {:?}",
            entry.meta.jsonl_path, entry.meta.num_frames, entry.video_frame_counts
        );
    }
    done(document, human)
}

fn convert(
    src: &Path,
    dst: &Path,
    encoder: &str,
    fps: u32,
    decoder: Option<&str>,
) -> Result<CommandOutput, CliError> {
    let encoder = EncoderCommand::parse(encoder)?;
    let decoder = decoder.map(DecoderCommand::parse).transpose()?;
    let bundles = load_bundles(src)?;
    let layout = DatasetLayout::new(dst);

    let mut episodes = Vec::new();
    let mut human = format!("converted {} episodes into {}", bundles.len(), dst.display());
    for bundle in &bundles {
        let meta = convert_episode(bundle, &layout, &encoder, fps)?;
        let roundtrip = decoder
            .as_ref()
            .map(|d| verify_roundtrip(bundle, &layout, Some(d)))
            .transpose()?;
        let _ = write!(
            human,
            "\n  {}: {} frames x {} views",
            bundle.name,
            meta.num_frames,
            meta.video_paths.len()
        );
        if let Some(report) = &roundtrip {
            let _ = write!(human, " ({report})");
        }
        episodes.push(json!({
            "episode": bundle.name,
            "jsonl_path": meta.jsonl_path,
            "num_frames": meta.num_frames,
            "num_views": meta.video_paths.len(),
            "verified": roundtrip.is_some(),
        }));
    }

    let document = json!({
        "dst": dst.display().to_string(),
        "num_episodes": episodes.len(),
        "episodes": episodes,
    });
    done(document, human)
}

fn stats(src: &Path, dataset: &Path) -> Result<CommandOutput, CliError> {
    let layout = DatasetLayout::new(dataset);
    let report = storage_report(src, &layout)?;
    let document = serde_json::to_value(&report).expect("report serializes");
    let human = report.to_string();
    done(document, human)
}

/// Load the node set around `exp`, resolve the node named in that
/// file, then apply `--set` overrides at highest precedence.
fn load_and_resolve(exp: &Path, sets: &[String]) -> Result<(String, ResolvedConfig), CliError> {
    let text = fs::read_to_string(exp)
        .map_err(|e| CliError::External(format!("reading {}: {e}", exp.display())))?;
    let node: ConfigNode = serde_json::from_str(&text)
        .map_err(|e| CliError::Invalid(format!("{} is not a config node: {e}", exp.display())))?;
    let dir = match exp.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    let nodes = NodeSet::load_dir(dir)?;
    let mut resolved = dexconfig::resolve_config(&node.name, &nodes)?;
    for spec in sets {
        resolved.apply_set(spec)?;
    }
    Ok((node.name, resolved))
}

/// Render the resolved leaves as an aligned table with one provenance
/// column per field.
fn provenance_table(resolved: &ResolvedConfig) -> String {
    let mut rows: Vec<(String, String, String)> = Vec::new();
    for (path, origin) in resolved.provenance() {
        let value = resolved
            .get(path)
            .map(|v| v.to_string())
            .unwrap_or_else(|| "null".to_owned());
        rows.push((path.clone(), value, origin.clone()));
    }
    let field_w = rows.iter().map(|r| r.0.len()).chain(["field".len()]).max().unwrap_or(5);
    let value_w = rows.iter().map(|r| r.1.len()).chain(["value".len()]).max().unwrap_or(5);
    let mut out = format!("{:<field_w$}  {:<value_w$}  source", "field", "value");
    for (field, value, source) in rows {
        let _ = write!(out, "\n{field:<field_w$}  {value:<value_w$}  {source}");
    }
    out
}

fn config_resolve(exp: &Path, sets: &[String]) -> Result<CommandOutput, CliError> {
    let (name, resolved) = load_and_resolve(exp, sets)?;
    let document = resolved.to_json();
    let human = format!("resolved '{name}'\n{}", provenance_table(&resolved));
    done(document, human)
}

fn run(exp: &Path, task: &str, sets: &[String]) -> Result<CommandOutput, CliError> {
    let (name, resolved) = load_and_resolve(exp, sets)?;
    let registry = builtin_registry();
    match dispatch_task(&resolved, task, &registry)? {
        TaskOutcome::Trained(report) => {
            let document = json!({
                "experiment": name,
                "task": "train",
                "report": serde_json::to_value(&report).expect("report serializes"),
            });
            let human = format!(
                "experiment '{name}', task train\n  episodes:      {}\n  frames:        {}\n  action frames: {}\n  state dims:    {:?}\n  action dims:   {:?}\n  mean |state|:  {}",
                report.num_episodes,
                report.num_frames,
                report.num_action_frames,
                report.state_dims,
                report.action_dims,
                report.mean_abs_state,
            );
            done(document, human)
        }
        TaskOutcome::Serving { backend, handle } => {
            let document = json!({
                "experiment": name,
                "task": "infer",
                "backend": backend,
                "url": handle.url(),
            });
            let human = format!(
                "experiment '{name}': serving backend '{backend}' at {}\npress Ctrl-C to stop",
                handle.url()
            );
            Ok(CommandOutput::Serving {
                output: Output { document, human },
                handle,
            })
        }
    }
}

fn serve(
    port: u16,
    backend: &str,
    dof: Option<usize>,
    backend_args: &[String],
) -> Result<CommandOutput, CliError> {
    let params = BackendParams::from_args(dof, backend_args)?;
    let registry = builtin_registry();
    let make = backend_factory(&registry, backend)?;
    let backend_impl = make(&params)?;
    let dof = backend_impl.dof();
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    let handle = dexserve::serve(addr, backend_impl)?;

    let document = json!({
        "backend": backend,
        "dof": dof,
        "url": handle.url(),
    });
    let human = format!(
        "serving '{backend}' (dof {dof}) at {}\npress Ctrl-C to stop",
        handle.url()
    );
    Ok(CommandOutput::Serving {
        output: Output { document, human },
        handle,
    })
}

fn parse_pair(flag: &str, text: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() == 2 {
        if let (Ok(x), Ok(y)) = (
            parts[0].trim().parse::<f64>(),
            parts[1].trim().parse::<f64>(),
        ) {
            return Ok([x, y]);
        }
    }
    Err(CliError::Usage(format!("{flag} wants X,Y, got '{text}'")))
}

fn rollout(
    url: String,
    goal: &str,
    start: &str,
    chunk: usize,
    max_steps: u64,
    seed: Option<u64>,
    record: Option<PathBuf>,
) -> Result<CommandOutput, CliError> {
    let goal = parse_pair("--goal", goal)?;
    let start = parse_pair("--start", start)?;
    if chunk == 0 || chunk > MAX_CHUNK_SIZE {
        return Err(CliError::Usage(format!(
            "--chunk must be between 1 and {MAX_CHUNK_SIZE}, got {chunk}"
        )));
    }

    let mut options = RolloutOptions::new(url, goal);
    options.start = start;
    options.chunk_size = chunk;
    options.max_steps = max_steps;
    options.seed = seed;
    options.record = record.clone();
    let result = run_rollout(&options)?;

    let document = json!({
        "goal": goal.to_vec(),
        "max_steps": max_steps,
        "steps_taken": result.steps_taken,
        "success": result.success,
        "record": record.as_ref().map(|p| p.display().to_string()),
    });
    let mut human = if result.success {
        format!(
            "reached ({}, {}) in {} steps",
            goal[0], goal[1], result.steps_taken
        )
    } else {
        format!(
            "no success after {} steps (budget {max_steps})",
            result.steps_taken
        )
    };
    if let Some(path) = &record {
        let _ = write!(human, "\ntrajectory recorded to {}", path.display());
    }
    done(document, human)
}

fn probe_mp4(input: &Path, frame: Option<u64>) -> Result<CommandOutput, CliError> {
    let (info, table) = index_video(input)?;
    let mut document = json!({
        "frame_count": info.frame_count,
        "duration_seconds": info.duration_seconds,
        "timescale": info.timescale,
    });
    let mut human = format!(
        "{}: {} frames, {:.3} s at timescale {}",
        input.display(),
        info.frame_count,
        info.duration_seconds,
        info.timescale
    );
    if let Some(frame_idx) = frame {
        let location = table.locate(frame_idx)?;
        document["frame"] = json!({
            "frame_idx": frame_idx,
            "byte_offset": location.byte_offset,
            "byte_len": location.byte_len,
            "pts_seconds": location.pts_seconds,
        });
        let _ = write!(
            human,
            "\nframe {frame_idx}: bytes [{}, {}), pts {:.3} s",
            location.byte_offset,
            location.byte_offset + u64::from(location.byte_len),
            location.pts_seconds
        );
    }
    done(document, human)
}

fn stub_encode(
    input_list: &Path,
    fps: u32,
    output: &Path,
    limit_frames: Option<u64>,
) -> Result<CommandOutput, CliError> {
    let text = fs::read_to_string(input_list)
        .map_err(|e| CliError::External(format!("reading {}: {e}", input_list.display())))?;
    let images: Vec<PathBuf> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(PathBuf::from)
        .collect();
    stubenc::encode(&images, fps, output, limit_frames)?;
    let written = limit_frames.map_or(images.len() as u64, |l| l.min(images.len() as u64));

    let document = json!({
        "output": output.display().to_string(),
        "num_frames": written,
        "fps": fps,
    });
    let human = format!("encoded {written} frames into {}", output.display());
    done(document, human)
}

fn stub_decode(input: &Path, output_dir: &Path) -> Result<CommandOutput, CliError> {
    let frames = stubenc::decode(input, output_dir)?;
    let document = json!({
        "output_dir": output_dir.display().to_string(),
        "num_frames": frames.len(),
    });
    let human = format!(
        "decoded {} frames into {}",
        frames.len(),
        output_dir.display()
    );
    done(document, human)
}
