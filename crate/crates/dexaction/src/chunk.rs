use crate::error::ActionError;
use crate::space::{dequantize_tokens, quantize_action, ActionSpace};

/// A short horizon of consecutive continuous actions (T×N), tied to the
/// space that normalizes them. Rows are validated on construction, so
/// quantization can never fail afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionChunk {
    space: ActionSpace,
    steps: Vec<Vec<f64>>,
}

impl ActionChunk {
    /// `steps` must be non-empty, every row dimensioned like `space`, and
    /// all values finite.
    pub fn new(space: ActionSpace, steps: Vec<Vec<f64>>) -> Result<Self, ActionError> {
        if steps.is_empty() {
            return Err(ActionError::EmptyStream);
        }
        for (t, row) in steps.iter().enumerate() {
            if row.len() != space.dims() {
                return Err(ActionError::DimensionMismatch(format!(
                    "step {t} has {} dimensions, space has {}",
                    row.len(),
                    space.dims()
                )));
            }
            for (d, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(ActionError::NonFiniteValue(format!("step {t}, dimension {d}: {v}")));
                }
            }
        }
        Ok(ActionChunk { space, steps })
    }

    /// Decode a T×N token matrix into a chunk of bin-center actions.
    pub fn from_tokens(space: ActionSpace, tokens: &[Vec<u16>]) -> Result<Self, ActionError> {
        if tokens.is_empty() {
            return Err(ActionError::EmptyStream);
        }
        let steps = tokens
            .iter()
            .map(|row| dequantize_tokens(row, &space))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ActionChunk { space, steps })
    }

    pub fn space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn steps(&self) -> &[Vec<f64>] {
        &self.steps
    }

    /// Horizon length T.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Quantize every step; infallible because rows were validated.
    pub fn quantize(&self) -> Vec<Vec<u16>> {
        self.steps
            .iter()
            .map(|row| quantize_action(row, &self.space).expect("rows validated at construction"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::BoundsPolicy;

    fn space() -> ActionSpace {
        ActionSpace::new(vec![-1.0, -1.0], vec![1.0, 1.0], BoundsPolicy::MinMax).unwrap()
    }

    #[test]
    fn chunk_validates_shape() {
        assert_eq!(
            ActionChunk::new(space(), vec![]).unwrap_err(),
            ActionError::EmptyStream
        );
        assert!(matches!(
            ActionChunk::new(space(), vec![vec![0.0]]).unwrap_err(),
            ActionError::DimensionMismatch(_)
        ));
        assert!(matches!(
            ActionChunk::new(space(), vec![vec![0.0, f64::NAN]]).unwrap_err(),
            ActionError::NonFiniteValue(_)
        ));
    }

    #[test]
    fn quantize_then_decode_round_trips_within_half_a_bin() {
        let chunk = ActionChunk::new(
            space(),
            vec![vec![0.0, 0.5], vec![-0.25, 0.99], vec![1.0, -1.0]],
        )
        .unwrap();
        let tokens = chunk.quantize();
        assert_eq!(tokens.len(), 3);
        let decoded = ActionChunk::from_tokens(chunk.space().clone(), &tokens).unwrap();
        for (row, orig) in decoded.steps().iter().zip(chunk.steps()) {
            for (a, b) in row.iter().zip(orig) {
                assert!((a - b).abs() <= 2.0 / 512.0);
            }
        }
    }

    #[test]
    fn from_tokens_rejects_bad_ids() {
        assert_eq!(
            ActionChunk::from_tokens(space(), &[vec![0, 999]]).unwrap_err(),
            ActionError::TokenOutOfRange { id: 999, bins: 256 }
        );
    }
}
