use std::fs;
use std::time::{SystemTime, UNIX_EPOCH};

use dexdata::{scan_dataset, to_canonical_json, DatasetLayout, EpisodeMeta};
use serde::{Deserialize, Serialize};

use crate::error::ConvertError;

pub const INDEX_VERSION: u32 = 1;

/// One episode's cache entry: the validated metadata plus the probed
/// frame count of every referenced video, in view order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    #[serde(flatten)]
    pub meta: EpisodeMeta,
    pub video_frame_counts: Vec<u64>,
}

/// The generated `jsonl/index_cache.json`: schema version, creation
/// timestamp and one entry per episode, sorted by jsonl path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexCache {
    pub version: u32,
    pub created_unix: u64,
    pub episodes: Vec<IndexEntry>,
}

/// Scan the dataset, cross-check every episode against its videos and
/// write the index cache. `epoch` pins `created_unix` so that rebuilds
/// are byte-identical; without it the current time is stamped.
///
/// Every referenced video must exist, parse, and contain strictly more
/// frames than the highest `frame_idx` that references it.
pub fn build_index_cache(
    layout: &DatasetLayout,
    epoch: Option<u64>,
) -> Result<IndexCache, ConvertError> {
    let scan = scan_dataset(layout)?;

    let mut episodes = Vec::new();
    for validation in &scan.validations {
        let meta: &EpisodeMeta = match &validation.meta {
            Some(meta) => meta,
            None => return Err(ConvertError::InvalidEpisode(validation.report.clone())),
        };

        let mut video_frame_counts = Vec::with_capacity(meta.video_paths.len());
        for (view, rel) in meta.video_paths.iter().enumerate() {
            let path = layout.resolve(rel);
            if !path.is_file() {
                return Err(ConvertError::StaleVideo {
                    jsonl: meta.jsonl_path.clone(),
                    video: rel.clone(),
                });
            }
            let info = dexmp4::probe_video(&path).map_err(|e| ConvertError::mp4(&path, e))?;
            let max_idx = validation.max_frame_indices.get(view).copied().unwrap_or(0);
            if max_idx >= info.frame_count {
                return Err(ConvertError::FrameIdxOutOfRange {
                    jsonl: meta.jsonl_path.clone(),
                    video: rel.clone(),
                    view: view + 1,
                    frame_idx: max_idx,
                    frame_count: info.frame_count,
                });
            }
            video_frame_counts.push(info.frame_count);
        }

        episodes.push(IndexEntry {
            meta: meta.clone(),
            video_frame_counts,
        });
    }

    // scan_dataset orders by file name, which equals jsonl_path order.
    debug_assert!(episodes.windows(2).all(|w| w[0].meta.jsonl_path <= w[1].meta.jsonl_path));

    let created_unix = match epoch {
        Some(seconds) => seconds,
        None => SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };

    let cache = IndexCache {
        version: INDEX_VERSION,
        created_unix,
        episodes,
    };

    let mut text = to_canonical_json(&cache)?;
    text.push('\n');
    let path = layout.index_path();
    fs::write(&path, text).map_err(|e| ConvertError::io(&path, e))?;
    Ok(cache)
}
