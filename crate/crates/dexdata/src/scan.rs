use std::fs;

use crate::error::DexdataError;
use crate::layout::DatasetLayout;
use crate::validate::{validate_episode, EpisodeMeta, EpisodeValidation, ValidationReport};

/// Result of scanning a whole dataset: one validation per `*.jsonl` file
/// under `jsonl/`, ordered by file name (byte-lexicographic). The order is
/// a pure function of the file names, never of directory enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub validations: Vec<EpisodeValidation>,
}

impl ScanReport {
    /// Metadata of every episode that validated (possibly with warnings).
    pub fn metas(&self) -> Vec<EpisodeMeta> {
        self.validations
            .iter()
            .filter_map(|v| v.meta.clone())
            .collect()
    }

    /// Reports of episodes that had at least one violation of any severity.
    pub fn reports(&self) -> Vec<&ValidationReport> {
        self.validations
            .iter()
            .filter(|v| !v.report.violations.is_empty())
            .map(|v| &v.report)
            .collect()
    }

    pub fn is_clean(&self) -> bool {
        self.validations.iter().all(|v| !v.report.has_errors())
    }
}

/// Validate every episode file under `jsonl/`. The index cache and any
/// non-`.jsonl` file are skipped.
pub fn scan_dataset(layout: &DatasetLayout) -> Result<ScanReport, DexdataError> {
    let jsonl_dir = layout.jsonl_dir();
    let entries = fs::read_dir(&jsonl_dir).map_err(|e| DexdataError::io(&jsonl_dir, e))?;

    let mut names: Vec<String> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| DexdataError::io(&jsonl_dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".jsonl") && entry.path().is_file() {
            names.push(name);
        }
    }
    names.sort_unstable();

    let mut validations = Vec::with_capacity(names.len());
    for name in names {
        validations.push(validate_episode(&jsonl_dir.join(name), layout)?);
    }
    Ok(ScanReport { validations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_valid_episode(layout: &DatasetLayout, name: &str, frames: usize) {
        let path = layout.jsonl_dir().join(name);
        let mut f = fs::File::create(path).unwrap();
        for i in 0..frames {
            writeln!(
                f,
                r#"{{"images_1":{{"type":"video","url":"video/{stem}.mp4","frame_idx":{i}}},"state":[0.1,0.2],"prompt":"open the door","is_robot":true}}"#,
                stem = name.trim_end_matches(".jsonl"),
            )
            .unwrap();
        }
    }

    #[test]
    fn two_episode_dataset_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let layout = DatasetLayout::new(dir.path());
        layout.create_dirs().unwrap();
        // Write in reverse order; scan must sort by name.
        write_valid_episode(&layout, "episode2.jsonl", 3);
        write_valid_episode(&layout, "episode1.jsonl", 2);
        fs::write(layout.index_path(), "{}").unwrap();

        let report = scan_dataset(&layout).unwrap();
        let metas = report.metas();
        assert_eq!(metas.len(), 2);
        assert_eq!(metas[0].jsonl_path, "jsonl/episode1.jsonl");
        assert_eq!(metas[1].jsonl_path, "jsonl/episode2.jsonl");
        assert!(report.is_clean());
    }

    #[test]
    fn empty_jsonl_dir_yields_empty_list() {
        let dir = tempfile::tempdir().unwrap();
        let layout = DatasetLayout::new(dir.path());
        layout.create_dirs().unwrap();
        let report = scan_dataset(&layout).unwrap();
        assert!(report.validations.is_empty());
        assert!(report.is_clean());
    }

    #[test]
    fn rescan_is_identical() {
        let dir = tempfile::tempdir().unwrap();
        let layout = DatasetLayout::new(dir.path());
        layout.create_dirs().unwrap();
        for i in 0..20 {
            write_valid_episode(&layout, &format!("ep{i:03}.jsonl"), 2);
        }
        let a = scan_dataset(&layout).unwrap();
        let b = scan_dataset(&layout).unwrap();
        assert_eq!(a, b);
    }
}
