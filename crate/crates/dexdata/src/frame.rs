use serde_json::{Map, Number, Value};

use crate::error::FrameError;

/// View keys in a frame line are `images_1`, `images_2`, ... with indices
/// starting at 1 and contiguous.
pub const VIEW_KEY_PREFIX: &str = "images_";

const KIND_VIDEO: &str = "video";

/// Reference to one frame inside an mp4 file.
///
/// The serialized form is `{"type": "video", "url": ..., "frame_idx": ...}`.
/// `url` is a path relative to the dataset root. Unknown keys inside the
/// object are kept in `extras` so round-trips are byte-exact.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRef {
    pub url: String,
    pub frame_idx: u64,
    pub extras: Map<String, Value>,
}

impl ImageRef {
    pub fn new(url: impl Into<String>, frame_idx: u64) -> Self {
        ImageRef {
            url: url.into(),
            frame_idx,
            extras: Map::new(),
        }
    }

    fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("type".to_owned(), Value::String(KIND_VIDEO.to_owned()));
        obj.insert("url".to_owned(), Value::String(self.url.clone()));
        obj.insert("frame_idx".to_owned(), Value::Number(Number::from(self.frame_idx)));
        for (k, v) in &self.extras {
            obj.insert(k.clone(), v.clone());
        }
        Value::Object(obj)
    }
}

/// One timestep of an episode: multi-view image references, proprioceptive
/// state, task prompt and a real-robot flag.
///
/// `views[0]` corresponds to the `images_1` key, `views[1]` to `images_2`,
/// and so on; contiguity is guaranteed by construction. `state` keeps the
/// raw JSON numbers so integer-vs-float identity survives a round trip;
/// use [`EpisodeFrame::state_f64`] for numeric work.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeFrame {
    views: Vec<ImageRef>,
    state: Vec<Number>,
    prompt: String,
    is_robot: bool,
    extras: Map<String, Value>,
}

impl EpisodeFrame {
    /// Build a frame, checking the type invariants: at least one view and
    /// no extras key that collides with a semantic key.
    pub fn new(
        views: Vec<ImageRef>,
        state: Vec<Number>,
        prompt: impl Into<String>,
        is_robot: bool,
        extras: Map<String, Value>,
    ) -> Result<Self, FrameError> {
        if views.is_empty() {
            return Err(FrameError::MissingField("views".to_owned()));
        }
        for key in extras.keys() {
            if key == "state" || key == "prompt" || key == "is_robot" || view_index(key).is_some()
            {
                return Err(FrameError::BadViewKeys(format!(
                    "extras key '{key}' collides with a semantic key"
                )));
            }
        }
        Ok(EpisodeFrame {
            views,
            state,
            prompt: prompt.into(),
            is_robot,
            extras,
        })
    }

    pub fn views(&self) -> &[ImageRef] {
        &self.views
    }

    pub fn state(&self) -> &[Number] {
        &self.state
    }

    /// State vector as f64, for numeric consumers.
    pub fn state_f64(&self) -> Vec<f64> {
        self.state.iter().filter_map(Number::as_f64).collect()
    }

    pub fn prompt(&self) -> &str {
        &self.prompt
    }

    pub fn is_robot(&self) -> bool {
        self.is_robot
    }

    pub fn extras(&self) -> &Map<String, Value> {
        &self.extras
    }

    /// Name of view `i` as it appears in the serialized line.
    pub fn view_name(i: usize) -> String {
        format!("{VIEW_KEY_PREFIX}{}", i + 1)
    }
}

/// Parse a view key of the form `images_<n>` with `n >= 1` and no leading
/// zeros. Returns the 1-based index, or None if the key is not a view key
/// at all. Keys that look like view keys but are non-canonical (e.g.
/// `images_01`, `images_0`) return Some(Err(..)) so they are rejected
/// rather than silently treated as extras.
fn view_index(key: &str) -> Option<Result<u64, FrameError>> {
    let digits = key.strip_prefix(VIEW_KEY_PREFIX)?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if digits.starts_with('0') {
        return Some(Err(FrameError::BadViewKeys(format!(
            "view key '{key}' has a leading zero or zero index"
        ))));
    }
    match digits.parse::<u64>() {
        Ok(n) => Some(Ok(n)),
        Err(_) => Some(Err(FrameError::BadViewKeys(format!(
            "view key '{key}' index out of range"
        )))),
    }
}

fn parse_image_ref(view: &str, value: &Value) -> Result<ImageRef, FrameError> {
    let obj = value.as_object().ok_or_else(|| FrameError::BadImageRef {
        view: view.to_owned(),
        detail: "not a JSON object".to_owned(),
    })?;
    let bad = |detail: String| FrameError::BadImageRef {
        view: view.to_owned(),
        detail,
    };

    let kind = obj
        .get("type")
        .ok_or_else(|| bad("missing 'type'".to_owned()))?;
    match kind.as_str() {
        Some(KIND_VIDEO) => {}
        Some(other) => return Err(bad(format!("unsupported type '{other}'"))),
        None => return Err(bad("'type' must be a string".to_owned())),
    }

    let url = obj
        .get("url")
        .ok_or_else(|| bad("missing 'url'".to_owned()))?
        .as_str()
        .ok_or_else(|| bad("'url' must be a string".to_owned()))?;
    if url.is_empty() {
        return Err(bad("'url' is empty".to_owned()));
    }

    let frame_idx = obj
        .get("frame_idx")
        .ok_or_else(|| bad("missing 'frame_idx'".to_owned()))?
        .as_u64()
        .ok_or_else(|| bad("'frame_idx' must be a non-negative integer".to_owned()))?;

    let mut extras = Map::new();
    for (k, v) in obj {
        if k != "type" && k != "url" && k != "frame_idx" {
            extras.insert(k.clone(), v.clone());
        }
    }

    Ok(ImageRef {
        url: url.to_owned(),
        frame_idx,
        extras,
    })
}

/// Parse one jsonl line into an [`EpisodeFrame`].
///
/// Unknown top-level keys are preserved in the frame's extras map, so
/// `serialize_frame_line(parse_frame_line(line))` is the canonical form
/// of `line` with nothing dropped.
pub fn parse_frame_line(line: &str) -> Result<EpisodeFrame, FrameError> {
    let value: Value = serde_json::from_str(line.trim_end_matches(['\r', '\n']))
        .map_err(|e| FrameError::MalformedJson(e.to_string()))?;
    let obj = match value {
        Value::Object(obj) => obj,
        _ => return Err(FrameError::MalformedJson("not a JSON object".to_owned())),
    };

    let mut view_slots: Vec<Option<ImageRef>> = Vec::new();
    let mut state: Option<Vec<Number>> = None;
    let mut prompt: Option<String> = None;
    let mut is_robot: Option<bool> = None;
    let mut extras = Map::new();

    for (key, val) in &obj {
        if let Some(idx) = view_index(key) {
            let idx = idx?;
            let slot = usize::try_from(idx - 1).expect("view index fits usize");
            if slot >= view_slots.len() {
                view_slots.resize(slot + 1, None);
            }
            view_slots[slot] = Some(parse_image_ref(key, val)?);
            continue;
        }
        match key.as_str() {
            "state" => {
                let arr = val.as_array().ok_or(FrameError::BadFieldType {
                    field: "state".to_owned(),
                    expected: "an array of numbers",
                })?;
                let mut nums = Vec::with_capacity(arr.len());
                for item in arr {
                    match item {
                        Value::Number(n) => nums.push(n.clone()),
                        _ => {
                            return Err(FrameError::BadFieldType {
                                field: "state".to_owned(),
                                expected: "an array of numbers",
                            })
                        }
                    }
                }
                state = Some(nums);
            }
            "prompt" => {
                prompt = Some(
                    val.as_str()
                        .ok_or(FrameError::BadFieldType {
                            field: "prompt".to_owned(),
                            expected: "a string",
                        })?
                        .to_owned(),
                );
            }
            "is_robot" => {
                is_robot = Some(val.as_bool().ok_or(FrameError::BadFieldType {
                    field: "is_robot".to_owned(),
                    expected: "a boolean",
                })?);
            }
            _ => {
                extras.insert(key.clone(), val.clone());
            }
        }
    }

    if view_slots.is_empty() {
        return Err(FrameError::MissingField("views".to_owned()));
    }
    let mut views = Vec::with_capacity(view_slots.len());
    for (i, slot) in view_slots.into_iter().enumerate() {
        match slot {
            Some(r) => views.push(r),
            None => {
                return Err(FrameError::BadViewKeys(format!(
                    "view keys are not contiguous: '{}' is missing",
                    EpisodeFrame::view_name(i)
                )))
            }
        }
    }

    EpisodeFrame::new(
        views,
        state.ok_or_else(|| FrameError::MissingField("state".to_owned()))?,
        prompt.ok_or_else(|| FrameError::MissingField("prompt".to_owned()))?,
        is_robot.ok_or_else(|| FrameError::MissingField("is_robot".to_owned()))?,
        extras,
    )
}

/// Serialize a frame to one line of canonical JSON: keys sorted
/// lexicographically, no insignificant whitespace, numbers in shortest
/// round-trip form. No trailing newline.
pub fn serialize_frame_line(frame: &EpisodeFrame) -> String {
    let mut obj = Map::new();
    for (i, r) in frame.views.iter().enumerate() {
        obj.insert(EpisodeFrame::view_name(i), r.to_value());
    }
    obj.insert(
        "state".to_owned(),
        Value::Array(frame.state.iter().cloned().map(Value::Number).collect()),
    );
    obj.insert("prompt".to_owned(), Value::String(frame.prompt.clone()));
    obj.insert("is_robot".to_owned(), Value::Bool(frame.is_robot));
    for (k, v) in &frame.extras {
        obj.insert(k.clone(), v.clone());
    }
    serde_json::to_string(&Value::Object(obj)).expect("frame serialization cannot fail")
}
