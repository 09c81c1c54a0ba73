use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde_json::Value;

/// Default action-chunk length when the request omits `chunk_size`.
pub const DEFAULT_CHUNK_SIZE: usize = 8;

/// Largest accepted `chunk_size`; the valid range is `[1, MAX_CHUNK_SIZE]`.
pub const MAX_CHUNK_SIZE: usize = 64;

/// One camera view from an `/v1/act` request. The gateway never decodes
/// pixels: only the view name, declared media type and payload size are
/// surfaced to backends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageMeta {
    pub view: String,
    pub media_type: String,
    pub num_bytes: usize,
}

/// A validated `/v1/act` request, ready to hand to a policy backend.
#[derive(Debug, Clone, PartialEq)]
pub struct ActInputs {
    pub prompt: String,
    pub state: Vec<f64>,
    pub images: Vec<ImageMeta>,
    pub chunk_size: usize,
    pub request_id: Option<String>,
}

/// A request rejection: a stable machine-readable `code` plus a
/// human-oriented message. Maps to HTTP 400.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestError {
    pub code: &'static str,
    pub message: String,
}

impl RequestError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        RequestError {
            code,
            message: message.into(),
        }
    }
}

/// Check an already-parsed JSON body against the `/v1/act` wire contract.
///
/// Field rules:
/// - `prompt` (required): string — absence is `MISSING_FIELD`.
/// - `state` (optional): array of numbers, defaults to empty.
/// - `images` (optional): object of `view -> {media_type, data}` where
///   `data` must be valid standard base64 (`BAD_BASE64` otherwise).
/// - `chunk_size` (optional): integer in `[1, 64]`, defaults to 8; an
///   integer outside the range is `CHUNK_SIZE_OUT_OF_RANGE`.
/// - `request_id` (optional): string.
/// - At least one image or a non-empty state must be present, or the
///   request is rejected with `EMPTY_OBSERVATION`.
///
/// Wrongly-typed fields are `BAD_FIELD`. Unknown fields are ignored.
pub fn validate_act_request(body: &Value) -> Result<ActInputs, RequestError> {
    let obj = body
        .as_object()
        .ok_or_else(|| RequestError::new("BAD_JSON", "request body must be a JSON object"))?;

    let prompt = match obj.get("prompt") {
        None | Some(Value::Null) => {
            return Err(RequestError::new(
                "MISSING_FIELD",
                "required field \"prompt\" is missing",
            ))
        }
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(RequestError::new("BAD_FIELD", "\"prompt\" must be a string")),
    };

    let state = match obj.get("state") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(items)) => {
            let mut state = Vec::with_capacity(items.len());
            for (i, item) in items.iter().enumerate() {
                let x = item.as_f64().ok_or_else(|| {
                    RequestError::new("BAD_FIELD", format!("\"state[{i}]\" must be a number"))
                })?;
                state.push(x);
            }
            state
        }
        Some(_) => {
            return Err(RequestError::new(
                "BAD_FIELD",
                "\"state\" must be an array of numbers",
            ))
        }
    };

    let images = match obj.get("images") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Object(views)) => {
            let mut images = Vec::with_capacity(views.len());
            for (view, spec) in views {
                images.push(validate_image(view, spec)?);
            }
            images
        }
        Some(_) => {
            return Err(RequestError::new(
                "BAD_FIELD",
                "\"images\" must be an object mapping view names to image payloads",
            ))
        }
    };

    let chunk_size = match obj.get("chunk_size") {
        None | Some(Value::Null) => DEFAULT_CHUNK_SIZE,
        Some(v) if v.is_number() => match v.as_u64() {
            Some(n) if (1..=MAX_CHUNK_SIZE as u64).contains(&n) => n as usize,
            Some(n) => {
                return Err(RequestError::new(
                    "CHUNK_SIZE_OUT_OF_RANGE",
                    format!("\"chunk_size\" is {n}, valid range is [1, {MAX_CHUNK_SIZE}]"),
                ))
            }
            // A negative integer is still a range problem; a fractional
            // number is a malformed field.
            None if v.as_i64().is_some() => {
                return Err(RequestError::new(
                    "CHUNK_SIZE_OUT_OF_RANGE",
                    format!("\"chunk_size\" is {v}, valid range is [1, {MAX_CHUNK_SIZE}]"),
                ))
            }
            None => {
                return Err(RequestError::new(
                    "BAD_FIELD",
                    "\"chunk_size\" must be an integer",
                ))
            }
        },
        Some(_) => {
            return Err(RequestError::new(
                "BAD_FIELD",
                "\"chunk_size\" must be an integer",
            ))
        }
    };

    let request_id = match obj.get("request_id") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => {
            return Err(RequestError::new(
                "BAD_FIELD",
                "\"request_id\" must be a string",
            ))
        }
    };

    if images.is_empty() && state.is_empty() {
        return Err(RequestError::new(
            "EMPTY_OBSERVATION",
            "request carries no images and an empty state; a policy needs at least one",
        ));
    }

    Ok(ActInputs {
        prompt,
        state,
        images,
        chunk_size,
        request_id,
    })
}

fn validate_image(view: &str, spec: &Value) -> Result<ImageMeta, RequestError> {
    let spec = spec.as_object().ok_or_else(|| {
        RequestError::new("BAD_FIELD", format!("\"images.{view}\" must be an object"))
    })?;
    let media_type = match spec.get("media_type") {
        None | Some(Value::Null) => {
            return Err(RequestError::new(
                "MISSING_FIELD",
                format!("required field \"images.{view}.media_type\" is missing"),
            ))
        }
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            return Err(RequestError::new(
                "BAD_FIELD",
                format!("\"images.{view}.media_type\" must be a string"),
            ))
        }
    };
    let data = match spec.get("data") {
        None | Some(Value::Null) => {
            return Err(RequestError::new(
                "MISSING_FIELD",
                format!("required field \"images.{view}.data\" is missing"),
            ))
        }
        Some(Value::String(s)) => s,
        Some(_) => {
            return Err(RequestError::new(
                "BAD_FIELD",
                format!("\"images.{view}.data\" must be a base64 string"),
            ))
        }
    };
    let bytes = BASE64.decode(data).map_err(|e| {
        RequestError::new(
            "BAD_BASE64",
            format!("\"images.{view}.data\" is not valid base64: {e}"),
        )
    })?;
    Ok(ImageMeta {
        view: view.to_owned(),
        media_type,
        num_bytes: bytes.len(),
    })
}
