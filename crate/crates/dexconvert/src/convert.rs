use std::io::Write;
use std::process::Command;

use dexdata::{
    serialize_frame_line, validate_episode, DatasetLayout, DexdataError, EpisodeFrame,
    EpisodeMeta, ImageRef,
};
use serde_json::{Map, Value};

use crate::bundle::RawEpisodeBundle;
use crate::error::ConvertError;
use crate::template::EncoderCommand;

/// Convert one raw bundle into the dataset at `layout`: one mp4 per
/// view (via the external encoder), one jsonl file, full validation.
///
/// View `k` (1-based, by sorted view-directory name) becomes
/// `video/{episode}_images_{k}.mp4` and the `images_{k}` key of every
/// frame line. Frame `i`'s ImageRefs carry `frame_idx = i`. Optional
/// per-frame actions are stored under the `"action"` extras key.
pub fn convert_episode(
    bundle: &RawEpisodeBundle,
    layout: &DatasetLayout,
    encoder: &EncoderCommand,
    fps: u32,
) -> Result<EpisodeMeta, ConvertError> {
    layout
        .create_dirs()
        .map_err(|e| ConvertError::io(layout.root(), e))?;

    let mut video_rel_paths = Vec::with_capacity(bundle.views.len());
    for (k, view) in bundle.views.iter().enumerate() {
        let file_name = format!("{}_images_{}.mp4", bundle.name, k + 1);
        let output = layout.video_dir().join(&file_name);

        let mut list = tempfile::NamedTempFile::new()
            .map_err(|e| ConvertError::io(std::env::temp_dir(), e))?;
        for frame in &view.frames {
            writeln!(list, "{}", frame.display())
                .map_err(|e| ConvertError::io(list.path(), e))?;
        }
        list.flush().map_err(|e| ConvertError::io(list.path(), e))?;

        let args = encoder.render(list.path(), fps, &output);
        let run = Command::new(&args[0])
            .args(&args[1..])
            .output()
            .map_err(|e| ConvertError::io(&args[0], e))?;
        if !run.status.success() {
            return Err(ConvertError::EncoderFailed {
                status: run.status.code(),
                stderr: String::from_utf8_lossy(&run.stderr).into_owned(),
            });
        }

        let info = dexmp4::probe_video(&output).map_err(|e| ConvertError::mp4(&output, e))?;
        if info.frame_count != bundle.num_frames() {
            return Err(ConvertError::FrameCountMismatch {
                video: output,
                expected: bundle.num_frames(),
                actual: info.frame_count,
            });
        }
        video_rel_paths.push(format!("video/{file_name}"));
    }

    let jsonl_path = layout.jsonl_dir().join(format!("{}.jsonl", bundle.name));
    let mut lines = String::new();
    for i in 0..bundle.states.len() {
        let views: Vec<ImageRef> = video_rel_paths
            .iter()
            .map(|rel| ImageRef::new(rel.clone(), i as u64))
            .collect();
        let mut extras = Map::new();
        if let Some(actions) = &bundle.actions {
            extras.insert(
                "action".to_string(),
                Value::Array(actions[i].iter().cloned().map(Value::Number).collect()),
            );
        }
        let frame = EpisodeFrame::new(
            views,
            bundle.states[i].clone(),
            &bundle.prompt,
            bundle.is_robot,
            extras,
        )
        .map_err(DexdataError::from)?;
        lines.push_str(&serialize_frame_line(&frame));
        lines.push('\n');
    }
    std::fs::write(&jsonl_path, lines).map_err(|e| ConvertError::io(&jsonl_path, e))?;

    let validation = validate_episode(&jsonl_path, layout)?;
    match validation.meta {
        Some(meta) => Ok(meta),
        None => Err(ConvertError::InvalidEpisode(validation.report)),
    }
}
