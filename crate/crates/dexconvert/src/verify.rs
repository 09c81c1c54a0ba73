use std::fmt;
use std::fs;
use std::path::Path;
use std::process::Command;

use dexdata::{parse_frame_line, DatasetLayout};
use serde_json::Value;

use crate::bundle::RawEpisodeBundle;
use crate::error::ConvertError;
use crate::template::DecoderCommand;

/// Whether pixel-level checks ran. Lossy encoders are permitted, so
/// "checked" means frame count and per-frame dimensions, not equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PixelCheck {
    Skipped,
    DimsChecked,
}

/// Outcome of re-checking a converted episode against its source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundtripReport {
    pub episode: String,
    pub frames: u64,
    pub views: usize,
    pub pixels: PixelCheck,
}

impl fmt::Display for RoundtripReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pixels = match self.pixels {
            PixelCheck::Skipped => "skipped",
            PixelCheck::DimsChecked => "dims-checked",
        };
        write!(
            f,
            "episode {}: {} frames x {} views, metadata: ok, pixels: {pixels}",
            self.episode, self.frames, self.views
        )
    }
}

/// Image dimensions of a PPM (P6) or PNG file.
pub fn sniff_dims(path: &Path) -> Result<(u32, u32), ConvertError> {
    let bad = |detail: String| ConvertError::BadImage {
        path: path.to_path_buf(),
        detail,
    };
    let bytes = fs::read(path).map_err(|e| ConvertError::io(path, e))?;

    if bytes.starts_with(b"P6") {
        let mut numbers = Vec::new();
        let mut i = 2;
        while i < bytes.len() && numbers.len() < 2 {
            match bytes[i] {
                b'#' => {
                    while i < bytes.len() && bytes[i] != b'\n' {
                        i += 1;
                    }
                }
                b if b.is_ascii_whitespace() => i += 1,
                b if b.is_ascii_digit() => {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let text = std::str::from_utf8(&bytes[start..i]).expect("ascii digits");
                    numbers.push(
                        text.parse::<u32>()
                            .map_err(|_| bad(format!("ppm dimension '{text}' out of range")))?,
                    );
                }
                other => return Err(bad(format!("unexpected byte {other:#04x} in ppm header"))),
            }
        }
        if numbers.len() < 2 {
            return Err(bad("ppm header ends before width and height".to_string()));
        }
        return Ok((numbers[0], numbers[1]));
    }

    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        if bytes.len() < 24 || &bytes[12..16] != b"IHDR" {
            return Err(bad("png too short or missing IHDR".to_string()));
        }
        let width = u32::from_be_bytes(bytes[16..20].try_into().expect("4 bytes"));
        let height = u32::from_be_bytes(bytes[20..24].try_into().expect("4 bytes"));
        return Ok((width, height));
    }

    Err(bad("not a PPM (P6) or PNG file".to_string()))
}

fn mismatch(line: u64, detail: impl Into<String>) -> ConvertError {
    ConvertError::MetadataMismatch {
        line: Some(line),
        detail: detail.into(),
    }
}

/// Re-check a converted episode against its source bundle: the jsonl
/// metadata must match the bundle exactly, and with a decoder command
/// configured, decoded frame counts and per-frame dimensions must
/// match the source images. Pixel equality is never required.
pub fn verify_roundtrip(
    bundle: &RawEpisodeBundle,
    layout: &DatasetLayout,
    decoder: Option<&DecoderCommand>,
) -> Result<RoundtripReport, ConvertError> {
    let jsonl_path = layout.jsonl_dir().join(format!("{}.jsonl", bundle.name));
    let text = fs::read_to_string(&jsonl_path).map_err(|e| ConvertError::io(&jsonl_path, e))?;
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() as u64 != bundle.num_frames() {
        return Err(ConvertError::MetadataMismatch {
            line: None,
            detail: format!(
                "jsonl has {} frames but the bundle has {}",
                lines.len(),
                bundle.num_frames()
            ),
        });
    }

    for (i, line) in lines.iter().enumerate() {
        let line_no = i as u64 + 1;
        let frame = parse_frame_line(line).map_err(|e| mismatch(line_no, e.to_string()))?;

        if frame.state() != bundle.states[i].as_slice() {
            return Err(mismatch(line_no, "state differs from states.json"));
        }
        if frame.prompt() != bundle.prompt {
            return Err(mismatch(line_no, "prompt differs from prompt.txt"));
        }
        if frame.is_robot() != bundle.is_robot {
            return Err(mismatch(line_no, "is_robot differs from meta.json"));
        }
        if frame.views().len() != bundle.views.len() {
            return Err(mismatch(
                line_no,
                format!(
                    "{} views in jsonl but {} in the bundle",
                    frame.views().len(),
                    bundle.views.len()
                ),
            ));
        }
        for (v, image_ref) in frame.views().iter().enumerate() {
            if image_ref.frame_idx != i as u64 {
                return Err(mismatch(
                    line_no,
                    format!(
                        "view {} frame_idx {} != frame ordinal {}",
                        v + 1,
                        image_ref.frame_idx,
                        i
                    ),
                ));
            }
            let expected_url = format!("video/{}_images_{}.mp4", bundle.name, v + 1);
            if image_ref.url != expected_url {
                return Err(mismatch(
                    line_no,
                    format!("view {} url '{}' != '{expected_url}'", v + 1, image_ref.url),
                ));
            }
        }

        let expected_action: Option<Value> = bundle
            .actions
            .as_ref()
            .map(|rows| Value::Array(rows[i].iter().cloned().map(Value::Number).collect()));
        if frame.extras().get("action") != expected_action.as_ref() {
            return Err(mismatch(line_no, "action differs from actions.json"));
        }
    }

    let mut pixels = PixelCheck::Skipped;
    if let Some(decoder) = decoder {
        for (v, view) in bundle.views.iter().enumerate() {
            let video = layout
                .video_dir()
                .join(format!("{}_images_{}.mp4", bundle.name, v + 1));
            let out_dir = tempfile::tempdir()
                .map_err(|e| ConvertError::io(std::env::temp_dir(), e))?;

            let args = decoder.render(&video, out_dir.path());
            let run = Command::new(&args[0])
                .args(&args[1..])
                .output()
                .map_err(|e| ConvertError::io(&args[0], e))?;
            if !run.status.success() {
                return Err(ConvertError::DecodeMismatch {
                    video,
                    detail: format!(
                        "decoder exited with {:?}: {}",
                        run.status.code(),
                        String::from_utf8_lossy(&run.stderr)
                    ),
                });
            }

            let mut decoded = Vec::new();
            let entries =
                fs::read_dir(out_dir.path()).map_err(|e| ConvertError::io(out_dir.path(), e))?;
            for entry in entries {
                let entry = entry.map_err(|e| ConvertError::io(out_dir.path(), e))?;
                if entry.path().is_file() {
                    decoded.push(entry.path());
                }
            }
            decoded.sort();

            if decoded.len() != view.frames.len() {
                return Err(ConvertError::DecodeMismatch {
                    video,
                    detail: format!(
                        "decoded {} frames but the source has {}",
                        decoded.len(),
                        view.frames.len()
                    ),
                });
            }
            for (i, (source, round)) in view.frames.iter().zip(&decoded).enumerate() {
                let want = sniff_dims(source)?;
                let got = sniff_dims(round)?;
                if want != got {
                    return Err(ConvertError::DecodeMismatch {
                        video,
                        detail: format!("frame {i} dims {got:?} != source dims {want:?}"),
                    });
                }
            }
        }
        pixels = PixelCheck::DimsChecked;
    }

    Ok(RoundtripReport {
        episode: bundle.name.clone(),
        frames: bundle.num_frames(),
        views: bundle.views.len(),
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sniffs_ppm_dims_with_comments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.ppm");
        fs::write(&path, b"P6\n# a comment\n3 2\n255\n\x00").unwrap();
        assert_eq!(sniff_dims(&path).unwrap(), (3, 2));
    }

    #[test]
    fn sniffs_png_dims_from_ihdr() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.png");
        let mut bytes = b"\x89PNG\r\n\x1a\n".to_vec();
        bytes.extend_from_slice(&13u32.to_be_bytes());
        bytes.extend_from_slice(b"IHDR");
        bytes.extend_from_slice(&640u32.to_be_bytes());
        bytes.extend_from_slice(&480u32.to_be_bytes());
        bytes.extend_from_slice(&[8, 2, 0, 0, 0]);
        fs::write(&path, bytes).unwrap();
        assert_eq!(sniff_dims(&path).unwrap(), (640, 480));
    }

    #[test]
    fn unknown_formats_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.xyz");
        fs::write(&path, b"GIF89a").unwrap();
        assert!(matches!(
            sniff_dims(&path),
            Err(ConvertError::BadImage { .. })
        ));
    }
}
