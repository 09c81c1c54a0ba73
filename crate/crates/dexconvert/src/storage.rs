use std::fmt;
use std::fs;
use std::path::Path;

use dexdata::DatasetLayout;
use serde::{Deserialize, Serialize};

use crate::error::ConvertError;

/// Byte accounting for one episode across both layouts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeStorage {
    pub name: String,
    pub source_bytes: u64,
    pub dexdata_bytes: u64,
}

/// Exact byte accounting of a raw source tree versus its converted
/// Dexdata tree. Totals are full recursive sums of each root (index
/// cache included); the per-episode rows pair each bundle directory
/// with its jsonl file and videos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StorageReport {
    pub source_bytes: u64,
    pub dexdata_bytes: u64,
    /// `source_bytes / dexdata_bytes`; null when the dataset is empty.
    pub ratio: Option<f64>,
    pub episodes: Vec<EpisodeStorage>,
}

impl fmt::Display for StorageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<24} {:>14} {:>14}", "episode", "source", "dexdata")?;
        for e in &self.episodes {
            writeln!(
                f,
                "{:<24} {:>14} {:>14}",
                e.name, e.source_bytes, e.dexdata_bytes
            )?;
        }
        writeln!(
            f,
            "{:<24} {:>14} {:>14}",
            "total", self.source_bytes, self.dexdata_bytes
        )?;
        match self.ratio {
            Some(r) => write!(f, "ratio (source/dexdata): {r:.3}"),
            None => write!(f, "ratio (source/dexdata): n/a"),
        }
    }
}

/// Recursive byte sum of every regular file under `path`.
fn tree_bytes(path: &Path) -> Result<u64, ConvertError> {
    let meta = fs::metadata(path).map_err(|e| ConvertError::io(path, e))?;
    if meta.is_file() {
        return Ok(meta.len());
    }
    let mut total = 0u64;
    let entries = fs::read_dir(path).map_err(|e| ConvertError::io(path, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| ConvertError::io(path, e))?;
        total += tree_bytes(&entry.path())?;
    }
    Ok(total)
}

/// Compare the raw source tree with the converted dataset.
///
/// Episodes are discovered from the source side: every subdirectory of
/// `source_root` is one bundle, paired with `jsonl/{name}.jsonl` and
/// all `video/{name}_images_*.mp4` files on the Dexdata side (zero
/// bytes when the episode has not been converted).
pub fn storage_report(
    source_root: &Path,
    layout: &DatasetLayout,
) -> Result<StorageReport, ConvertError> {
    let source_bytes = tree_bytes(source_root)?;
    let dexdata_bytes = tree_bytes(layout.root())?;

    let mut episodes = Vec::new();
    let entries = fs::read_dir(source_root).map_err(|e| ConvertError::io(source_root, e))?;
    let mut bundle_dirs = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| ConvertError::io(source_root, e))?;
        if entry.path().is_dir() {
            bundle_dirs.push(entry.path());
        }
    }
    bundle_dirs.sort();

    for dir in bundle_dirs {
        let name = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut converted = 0u64;

        let jsonl = layout.jsonl_dir().join(format!("{name}.jsonl"));
        if jsonl.is_file() {
            converted += tree_bytes(&jsonl)?;
        }
        let video_prefix = format!("{name}_images_");
        if let Ok(videos) = fs::read_dir(layout.video_dir()) {
            for video in videos {
                let video = video.map_err(|e| ConvertError::io(layout.video_dir(), e))?;
                let file_name = video.file_name().to_string_lossy().into_owned();
                if file_name.starts_with(&video_prefix) && video.path().is_file() {
                    converted += tree_bytes(&video.path())?;
                }
            }
        }

        episodes.push(EpisodeStorage {
            name,
            source_bytes: tree_bytes(&dir)?,
            dexdata_bytes: converted,
        });
    }

    let ratio = if dexdata_bytes == 0 {
        None
    } else {
        Some(source_bytes as f64 / dexdata_bytes as f64)
    };

    Ok(StorageReport {
        source_bytes,
        dexdata_bytes,
        ratio,
        episodes,
    })
}
