use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ActionError {
    #[error("empty action stream")]
    EmptyStream,

    #[error("ragged action dimensions: {0}")]
    RaggedDimensions(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("token {id} out of range for {bins} bins")]
    TokenOutOfRange { id: u16, bins: u32 },

    #[error("arm data does not match embodiment: {0}")]
    ArmMismatch(String),

    #[error("bad degrees of freedom: {0}")]
    BadDof(String),

    #[error("hybrid mask mismatch: {0}")]
    MaskMismatch(String),

    #[error("invalid action bounds: {0}")]
    BadBounds(String),

    #[error("quantile {0} must lie strictly inside (0, 0.5)")]
    BadQuantile(f64),

    #[error("non-finite action value: {0}")]
    NonFiniteValue(String),
}
