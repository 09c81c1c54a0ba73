use serde::{Deserialize, Serialize};

use crate::error::ActionError;

/// Number of discretization bins per action dimension. Fixed; every token
/// id lives in `[0, BINS)`.
pub const BINS: u32 = 256;

/// How normalization bounds are derived from data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundsPolicy {
    /// Exact per-dimension extrema of the fitted stream.
    MinMax,
    /// Symmetric quantile clipping: lo/hi are the q and 1−q empirical
    /// quantiles (nearest-rank). Robust to teleoperation outliers.
    Quantile(f64),
}

/// Per-dimension normalization bounds plus the fixed bin count.
///
/// Immutable once constructed; serializes to the `action_space.json`
/// sidecar stored beside a dataset's index cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawActionSpace")]
pub struct ActionSpace {
    dims: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    bins: u32,
    policy: BoundsPolicy,
}

/// Unvalidated mirror of [`ActionSpace`] used to funnel deserialization
/// through the same invariant checks as [`ActionSpace::new`].
#[derive(Deserialize)]
struct RawActionSpace {
    dims: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    bins: u32,
    policy: BoundsPolicy,
}

impl TryFrom<RawActionSpace> for ActionSpace {
    type Error = ActionError;

    fn try_from(raw: RawActionSpace) -> Result<Self, ActionError> {
        if raw.bins != BINS {
            return Err(ActionError::BadBounds(format!(
                "bins is {}, must be {BINS}",
                raw.bins
            )));
        }
        if raw.dims != raw.lo.len() {
            return Err(ActionError::BadBounds(format!(
                "dims is {} but lo has {} entries",
                raw.dims,
                raw.lo.len()
            )));
        }
        let space = ActionSpace::new(raw.lo, raw.hi, raw.policy)?;
        Ok(space)
    }
}

impl ActionSpace {
    /// Build a space from explicit bounds. `lo` and `hi` must be equal
    /// length, non-empty, finite, with `lo[d] <= hi[d]` everywhere.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, policy: BoundsPolicy) -> Result<Self, ActionError> {
        if lo.len() != hi.len() {
            return Err(ActionError::BadBounds(format!(
                "lo has {} entries, hi has {}",
                lo.len(),
                hi.len()
            )));
        }
        if lo.is_empty() {
            return Err(ActionError::BadBounds("zero action dimensions".to_owned()));
        }
        for (d, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !l.is_finite() || !h.is_finite() {
                return Err(ActionError::NonFiniteValue(format!(
                    "bound of dimension {d} is not finite ({l}, {h})"
                )));
            }
            if l > h {
                return Err(ActionError::BadBounds(format!(
                    "dimension {d} has lo {l} > hi {h}"
                )));
            }
        }
        if let BoundsPolicy::Quantile(q) = policy {
            if !(q > 0.0 && q < 0.5) {
                return Err(ActionError::BadQuantile(q));
            }
        }
        Ok(ActionSpace {
            dims: lo.len(),
            lo,
            hi,
            bins: BINS,
            policy,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn bins(&self) -> u32 {
        self.bins
    }

    pub fn policy(&self) -> BoundsPolicy {
        self.policy
    }

    /// A dimension is degenerate when its bounds coincide; it always
    /// quantizes to token 0 and dequantizes back to `lo`.
    pub fn is_degenerate(&self, dim: usize) -> bool {
        self.lo[dim] == self.hi[dim]
    }
}

/// Fit normalization bounds over a stream of N-vectors.
///
/// All rows must have the same length and finite values. `MinMax` tracks
/// running extrema; `Quantile(q)` buffers each dimension and takes the
/// nearest-rank q and 1−q empirical quantiles.
pub fn fit_space<I, V>(actions: I, policy: BoundsPolicy) -> Result<ActionSpace, ActionError>
where
    I: IntoIterator<Item = V>,
    V: AsRef<[f64]>,
{
    if let BoundsPolicy::Quantile(q) = policy {
        if !(q > 0.0 && q < 0.5) {
            return Err(ActionError::BadQuantile(q));
        }
    }

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut rows: u64 = 0;
    for (row_idx, row) in actions.into_iter().enumerate() {
        let row = row.as_ref();
        if row_idx == 0 {
            columns = vec![Vec::new(); row.len()];
        } else if row.len() != columns.len() {
            return Err(ActionError::RaggedDimensions(format!(
                "row {row_idx} has {} dimensions, row 0 has {}",
                row.len(),
                columns.len()
            )));
        }
        for (d, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(ActionError::NonFiniteValue(format!(
                    "row {row_idx}, dimension {d}: {v}"
                )));
            }
            columns[d].push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(ActionError::EmptyStream);
    }
    if columns.is_empty() {
        return Err(ActionError::BadBounds("zero action dimensions".to_owned()));
    }

    let mut lo = Vec::with_capacity(columns.len());
    let mut hi = Vec::with_capacity(columns.len());
    match policy {
        BoundsPolicy::MinMax => {
            for col in &columns {
                lo.push(col.iter().copied().fold(f64::INFINITY, f64::min));
                hi.push(col.iter().copied().fold(f64::NEG_INFINITY, f64::max));
            }
        }
        BoundsPolicy::Quantile(q) => {
            for col in &mut columns {
                col.sort_unstable_by(f64::total_cmp);
                lo.push(col[nearest_rank(q, col.len())]);
                hi.push(col[nearest_rank(1.0 - q, col.len())]);
            }
        }
    }
    ActionSpace::new(lo, hi, policy)
}

/// Nearest-rank index for quantile `q` of `n` sorted values:
/// the ceil(q·n)-th smallest, clamped into the valid range.
fn nearest_rank(q: f64, n: usize) -> usize {
    let rank = (q * n as f64).ceil() as usize;
    rank.clamp(1, n) - 1
}

/// Discretize one continuous action vector into per-dimension token ids.
///
/// `token[d] = clamp(floor((x[d] - lo[d]) / (hi[d] - lo[d]) * 256), 0, 255)`;
/// a degenerate dimension always yields 0. Out-of-range values clamp to
/// the boundary bins; NaN is rejected.
pub fn quantize_action(x: &[f64], space: &ActionSpace) -> Result<Vec<u16>, ActionError> {
    if x.len() != space.dims() {
        return Err(ActionError::DimensionMismatch(format!(
            "action has {} dimensions, space has {}",
            x.len(),
            space.dims()
        )));
    }
    let mut tokens = Vec::with_capacity(x.len());
    for (d, &v) in x.iter().enumerate() {
        if v.is_nan() {
            return Err(ActionError::NonFiniteValue(format!("dimension {d}: NaN")));
        }
        if space.is_degenerate(d) {
            tokens.push(0);
            continue;
        }
        let t = ((v - space.lo[d]) / (space.hi[d] - space.lo[d]) * f64::from(BINS)).floor();
        let id = if t < 0.0 {
            0
        } else if t > 255.0 {
            255
        } else {
            t as u16
        };
        tokens.push(id);
    }
    Ok(tokens)
}

/// Reconstruct a continuous vector from token ids as bin centers:
/// `x[d] = lo[d] + (id + 0.5) * (hi[d] - lo[d]) / 256`; a degenerate
/// dimension returns `lo[d]` exactly.
pub fn dequantize_tokens(tokens: &[u16], space: &ActionSpace) -> Result<Vec<f64>, ActionError> {
    if tokens.len() != space.dims() {
        return Err(ActionError::DimensionMismatch(format!(
            "token vector has {} dimensions, space has {}",
            tokens.len(),
            space.dims()
        )));
    }
    let mut x = Vec::with_capacity(tokens.len());
    for (d, &id) in tokens.iter().enumerate() {
        if u32::from(id) >= BINS {
            return Err(ActionError::TokenOutOfRange { id, bins: BINS });
        }
        if space.is_degenerate(d) {
            x.push(space.lo[d]);
        } else {
            let width = space.hi[d] - space.lo[d];
            x.push(space.lo[d] + (f64::from(id) + 0.5) * width / f64::from(BINS));
        }
    }
    Ok(x)
}
