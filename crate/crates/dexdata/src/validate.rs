use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::DexdataError;
use crate::frame::{parse_frame_line, EpisodeFrame};
use crate::layout::DatasetLayout;

/// Per-episode metadata, as stored in the index cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMeta {
    /// Path of the episode file, relative to the dataset root.
    pub jsonl_path: String,
    /// Video paths referenced by the episode, one per view, relative to
    /// the dataset root.
    pub video_paths: Vec<String>,
    pub num_frames: u64,
    pub state_dim: usize,
    pub prompt: String,
    /// Dimensionality of the optional per-frame "action" extra, when every
    /// frame carries one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action_dim: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    EmptyEpisode,
    MalformedLine,
    InconsistentStateDim,
    InconsistentPrompt,
    InconsistentViewCount,
    InconsistentVideoPath,
    InconsistentActionDim,
    BadActionValue,
    BadVideoExtension,
    AbsolutePath,
}

/// One problem found during validation. `line` is 1-based; violations that
/// concern the whole file carry no line number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    pub severity: Severity,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.line {
            Some(n) => write!(f, "line {n}: {sev}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

/// Every violation found in one episode file. Validation does not stop at
/// the first problem; all lines are checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub jsonl_path: String,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn has_errors(&self) -> bool {
        self.violations
            .iter()
            .any(|v| v.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Violation> {
        self.violations
            .iter()
            .filter(|v| v.severity == Severity::Warning)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}:", self.jsonl_path)?;
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

/// Outcome of validating one episode. `meta` is present iff the episode
/// has no error-severity violations (warnings are allowed).
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeValidation {
    pub report: ValidationReport,
    pub meta: Option<EpisodeMeta>,
    /// Highest `frame_idx` referenced per view; used by the index builder
    /// to cross-check against probed video frame counts.
    pub max_frame_indices: Vec<u64>,
}

impl EpisodeValidation {
    pub fn is_valid(&self) -> bool {
        self.meta.is_some()
    }
}

struct Reference {
    view_count: usize,
    video_paths: Vec<String>,
    state_dim: usize,
    prompt: String,
    action_dim: Option<usize>,
}

/// Extract the optional per-frame action vector from the "action" extras
/// key. Returns Ok(None) when absent, Err(msg) when present but malformed.
fn frame_action_dim(frame: &EpisodeFrame) -> Result<Option<usize>, String> {
    match frame.extras().get("action") {
        None => Ok(None),
        Some(Value::Array(items)) => {
            if items.iter().all(Value::is_number) {
                Ok(Some(items.len()))
            } else {
                Err("'action' must contain only numbers".to_owned())
            }
        }
        Some(_) => Err("'action' must be an array of numbers".to_owned()),
    }
}

/// Validate one episode file. I/O failures are fatal; every semantic
/// violation is collected into the report with its 1-based line number.
pub fn validate_episode(
    jsonl_path: &Path,
    layout: &DatasetLayout,
) -> Result<EpisodeValidation, DexdataError> {
    let text =
        fs::read_to_string(jsonl_path).map_err(|e| DexdataError::io(jsonl_path, e))?;

    let file_name = jsonl_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let rel_path = layout.episode_rel_path(&file_name);

    let mut violations = Vec::new();
    let mut reference: Option<Reference> = None;
    let mut num_frames: u64 = 0;
    let mut max_frame_indices: Vec<u64> = Vec::new();

    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let err = |kind: ViolationKind, message: String| Violation {
            line: Some(line_no),
            severity: Severity::Error,
            kind,
            message,
        };

        if line.trim().is_empty() {
            violations.push(err(ViolationKind::MalformedLine, "empty line".to_owned()));
            continue;
        }
        let frame = match parse_frame_line(line) {
            Ok(f) => f,
            Err(e) => {
                violations.push(err(ViolationKind::MalformedLine, e.to_string()));
                continue;
            }
        };
        num_frames += 1;

        let action_dim = match frame_action_dim(&frame) {
            Ok(d) => d,
            Err(msg) => {
                violations.push(err(ViolationKind::BadActionValue, msg));
                None
            }
        };

        for (v, r) in frame.views().iter().enumerate() {
            if !r.url.ends_with(".mp4") {
                violations.push(err(
                    ViolationKind::BadVideoExtension,
                    format!("view {} references non-mp4 file '{}'", v + 1, r.url),
                ));
            }
            if r.url.starts_with('/') {
                violations.push(Violation {
                    line: Some(line_no),
                    severity: Severity::Warning,
                    kind: ViolationKind::AbsolutePath,
                    message: format!(
                        "view {} uses absolute path '{}'; paths should be relative to the dataset root",
                        v + 1,
                        r.url
                    ),
                });
            }
            if v >= max_frame_indices.len() {
                max_frame_indices.resize(v + 1, 0);
            }
            max_frame_indices[v] = max_frame_indices[v].max(r.frame_idx);
        }

        match &reference {
            None => {
                reference = Some(Reference {
                    view_count: frame.views().len(),
                    video_paths: frame.views().iter().map(|r| r.url.clone()).collect(),
                    state_dim: frame.state().len(),
                    prompt: frame.prompt().to_owned(),
                    action_dim,
                });
            }
            Some(r) => {
                if frame.views().len() != r.view_count {
                    violations.push(err(
                        ViolationKind::InconsistentViewCount,
                        format!(
                            "frame has {} views but line 1 has {}",
                            frame.views().len(),
                            r.view_count
                        ),
                    ));
                } else {
                    for (v, (got, want)) in frame
                        .views()
                        .iter()
                        .zip(r.video_paths.iter())
                        .enumerate()
                    {
                        if got.url != *want {
                            violations.push(err(
                                ViolationKind::InconsistentVideoPath,
                                format!(
                                    "view {} references '{}' but line 1 references '{}'",
                                    v + 1,
                                    got.url,
                                    want
                                ),
                            ));
                        }
                    }
                }
                if frame.state().len() != r.state_dim {
                    violations.push(err(
                        ViolationKind::InconsistentStateDim,
                        format!(
                            "state has length {} but line 1 has {}",
                            frame.state().len(),
                            r.state_dim
                        ),
                    ));
                }
                if frame.prompt() != r.prompt {
                    violations.push(err(
                        ViolationKind::InconsistentPrompt,
                        format!(
                            "prompt {:?} differs from line 1 prompt {:?}",
                            frame.prompt(),
                            r.prompt
                        ),
                    ));
                }
                if action_dim != r.action_dim {
                    violations.push(err(
                        ViolationKind::InconsistentActionDim,
                        format!(
                            "action dimensionality {:?} differs from line 1 ({:?})",
                            action_dim, r.action_dim
                        ),
                    ));
                }
            }
        }
    }

    if num_frames == 0 && violations.is_empty() {
        violations.push(Violation {
            line: None,
            severity: Severity::Error,
            kind: ViolationKind::EmptyEpisode,
            message: "episode file has no frames".to_owned(),
        });
    }

    let has_errors = violations.iter().any(|v| v.severity == Severity::Error);
    let meta = if has_errors {
        None
    } else {
        reference.map(|r| EpisodeMeta {
            jsonl_path: rel_path.clone(),
            video_paths: r.video_paths,
            num_frames,
            state_dim: r.state_dim,
            prompt: r.prompt,
            action_dim: r.action_dim,
        })
    };

    Ok(EpisodeValidation {
        report: ValidationReport {
            jsonl_path: rel_path,
            violations,
        },
        meta,
        max_frame_indices,
    })
}
