use std::path::{Path, PathBuf};

/// On-disk layout of a Dexdata dataset. The subdirectory names are fixed
/// by the format: `video/` for mp4 files, `jsonl/` for episode files, and
/// `jsonl/index_cache.json` for the generated index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetLayout {
    root: PathBuf,
}

pub const VIDEO_DIR: &str = "video";
pub const JSONL_DIR: &str = "jsonl";
pub const INDEX_FILE: &str = "index_cache.json";

impl DatasetLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DatasetLayout { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn video_dir(&self) -> PathBuf {
        self.root.join(VIDEO_DIR)
    }

    pub fn jsonl_dir(&self) -> PathBuf {
        self.root.join(JSONL_DIR)
    }

    pub fn index_path(&self) -> PathBuf {
        self.jsonl_dir().join(INDEX_FILE)
    }

    /// Resolve a root-relative path from a jsonl line (e.g. an ImageRef url)
    /// to an absolute filesystem path.
    pub fn resolve(&self, relative: &str) -> PathBuf {
        self.root.join(relative)
    }

    /// Root-relative path of an episode file living in `jsonl/`.
    pub fn episode_rel_path(&self, file_name: &str) -> String {
        format!("{JSONL_DIR}/{file_name}")
    }

    /// Create `video/` and `jsonl/` under the root.
    pub fn create_dirs(&self) -> std::io::Result<()> {
        std::fs::create_dir_all(self.video_dir())?;
        std::fs::create_dir_all(self.jsonl_dir())?;
        Ok(())
    }
}
