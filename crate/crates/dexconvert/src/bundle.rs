use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Number;

use crate::error::ConvertError;

/// One camera view of a raw recording: a directory of numbered image
/// files, ordered by file name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViewDir {
    /// Directory name, e.g. `cam_front`.
    pub name: String,
    /// Image files in frame order (byte-lexicographic by name).
    pub frames: Vec<PathBuf>,
}

/// A raw episode recording before conversion:
///
/// ```text
/// <bundle>/
///     cam_.../       one subdirectory per view, numbered image files
///     states.json    [[f, ...], ...] one state vector per frame
///     actions.json   optional, same shape as states
///     prompt.txt     task prompt
///     meta.json      {"is_robot": bool}
/// ```
///
/// Every view must have exactly as many frames as `states` has rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEpisodeBundle {
    /// Episode name, taken from the bundle directory name.
    pub name: String,
    pub root: PathBuf,
    /// Views sorted by directory name; view k maps to `images_{k+1}`.
    pub views: Vec<ViewDir>,
    /// Raw JSON numbers so integer-vs-float identity survives into jsonl.
    pub states: Vec<Vec<Number>>,
    pub actions: Option<Vec<Vec<Number>>>,
    pub prompt: String,
    pub is_robot: bool,
}

#[derive(Deserialize)]
struct BundleMeta {
    is_robot: bool,
}

impl RawEpisodeBundle {
    pub fn num_frames(&self) -> u64 {
        self.states.len() as u64
    }
}

fn bad(path: &Path, detail: impl Into<String>) -> ConvertError {
    ConvertError::BadBundle {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConvertError> {
    let text = fs::read_to_string(path).map_err(|e| ConvertError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| bad(path, e.to_string()))
}

/// Load one bundle directory.
pub fn load_bundle(root: &Path) -> Result<RawEpisodeBundle, ConvertError> {
    let name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| bad(root, "bundle path has no directory name"))?;

    let states: Vec<Vec<Number>> = read_json(&root.join("states.json"))?;
    if states.is_empty() {
        return Err(bad(root, "states.json has no frames"));
    }

    let actions_path = root.join("actions.json");
    let actions: Option<Vec<Vec<Number>>> = if actions_path.exists() {
        Some(read_json(&actions_path)?)
    } else {
        None
    };
    if let Some(actions) = &actions {
        if actions.len() != states.len() {
            return Err(bad(
                root,
                format!(
                    "actions.json has {} rows but states.json has {}",
                    actions.len(),
                    states.len()
                ),
            ));
        }
    }

    let prompt_path = root.join("prompt.txt");
    let prompt = fs::read_to_string(&prompt_path)
        .map_err(|e| ConvertError::io(&prompt_path, e))?
        .trim_end()
        .to_string();

    let meta: BundleMeta = read_json(&root.join("meta.json"))?;

    let mut views = Vec::new();
    let entries = fs::read_dir(root).map_err(|e| ConvertError::io(root, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| ConvertError::io(root, e))?;
        if !entry.path().is_dir() {
            continue;
        }
        let view_name = entry.file_name().to_string_lossy().into_owned();
        let mut frames = Vec::new();
        let files = fs::read_dir(entry.path()).map_err(|e| ConvertError::io(entry.path(), e))?;
        for file in files {
            let file = file.map_err(|e| ConvertError::io(entry.path(), e))?;
            if file.path().is_file() {
                frames.push(file.path());
            }
        }
        frames.sort();
        views.push(ViewDir {
            name: view_name,
            frames,
        });
    }
    views.sort_by(|a, b| a.name.cmp(&b.name));

    if views.is_empty() {
        return Err(bad(root, "bundle has no view directories"));
    }
    for view in &views {
        if view.frames.len() != states.len() {
            return Err(bad(
                root,
                format!(
                    "view '{}' has {} frames but states.json has {}",
                    view.name,
                    view.frames.len(),
                    states.len()
                ),
            ));
        }
    }

    Ok(RawEpisodeBundle {
        name,
        root: root.to_path_buf(),
        views,
        states,
        actions,
        prompt,
        is_robot: meta.is_robot,
    })
}

/// Load every bundle under `src`, sorted by name. When `src` itself
/// contains a `states.json` it is treated as a single bundle.
pub fn load_bundles(src: &Path) -> Result<Vec<RawEpisodeBundle>, ConvertError> {
    if src.join("states.json").is_file() {
        return Ok(vec![load_bundle(src)?]);
    }
    let entries = fs::read_dir(src).map_err(|e| ConvertError::io(src, e))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| ConvertError::io(src, e))?;
        if entry.path().is_dir() {
            dirs.push(entry.path());
        }
    }
    dirs.sort();
    if dirs.is_empty() {
        return Err(bad(src, "no episode bundles found"));
    }
    dirs.iter().map(|d| load_bundle(d)).collect()
}
