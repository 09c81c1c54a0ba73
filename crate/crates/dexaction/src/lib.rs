//! Continuous-to-discrete action codec for robot policies.
//!
//! Three pieces, all pure functions over immutable data:
//!
//! - [`ActionSpace`]: per-dimension normalization bounds fitted from data
//!   ([`fit_space`]) with either exact min/max or symmetric quantile
//!   clipping. Serializes to the `action_space.json` sidecar stored next
//!   to a dataset's index cache.
//! - [`quantize_action`] / [`dequantize_tokens`]: each dimension is
//!   discretized separately into 256 equal-width bins; dequantization
//!   returns bin centers, which keeps the worst-case reconstruction error
//!   at half a bin, `(hi - lo) / 512`.
//! - [`pack_hybrid`] / [`unpack_hybrid`] / [`loss_mask_for`]: the fixed
//!   16-slot hybrid layout for one or two arms. The front half (slots
//!   0..8) carries the left arm, the second half (slots 8..16) the right
//!   arm; 7-DoF arms zero-pad slot 7/15 rather than compacting, so a
//!   slot's meaning never depends on the embodiment. Slots an embodiment
//!   does not supervise are masked false and hold 0.0.

mod chunk;
mod error;
mod hybrid;
mod space;

pub use chunk::ActionChunk;
pub use error::ActionError;
pub use hybrid::{
    loss_mask_for, pack_hybrid, unpack_hybrid, Arms, Embodiment, HybridTokens, HYBRID_SLOTS,
    RIGHT_SLOT_BASE,
};
pub use space::{dequantize_tokens, fit_space, quantize_action, ActionSpace, BoundsPolicy, BINS};
