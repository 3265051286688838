//! Multi-domain fusion: feature-level concatenation and model-level
//! stacking over base-model probabilities.

pub mod adaboost;

pub use adaboost::{train_stacker, AdaBoostModel, BoostRound, Stump};

use crate::learn::LearnError;

/// Number of base models feeding the stacker.
pub const STACK_DIM: usize = 5;

/// Fixed order of the stacker's probability inputs.
pub const STACK_INPUT_NAMES: [&str; STACK_DIM] = [
    "forest_acoustic",
    "time_usage",
    "show_type",
    "bow",
    "mlp_acoustic",
];

/// Per-utterance KID probabilities from the five base models, in
/// [`STACK_INPUT_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackInput(pub [f64; STACK_DIM]);

impl StackInput {
    pub fn new(values: [f64; STACK_DIM]) -> Self {
        assert!(
            values.iter().all(|p| (0.0..=1.0).contains(p)),
            "stack inputs must be probabilities"
        );
        Self(values)
    }
}

/// Concatenate per-domain feature vectors in the fixed layout
/// `[acoustic, bow, time, ratio]`. Every vector must match its declared
/// domain dimension.
pub fn fuse_features(
    acoustic: &[f64],
    bow: &[f64],
    time: &[f64],
    ratio: &[f64],
    bow_dim: usize,
) -> Result<Vec<f64>, LearnError> {
    use crate::context::{RATIO_FEATURE_DIM, TIME_FEATURE_DIM};
    use crate::features::IS10_DIM;

    for (got, expected) in [
        (acoustic.len(), IS10_DIM),
        (bow.len(), bow_dim),
        (time.len(), TIME_FEATURE_DIM),
        (ratio.len(), RATIO_FEATURE_DIM),
    ] {
        if got != expected {
            return Err(LearnError::DimensionMismatch { expected, got });
        }
    }
    let mut out = Vec::with_capacity(acoustic.len() + bow.len() + time.len() + ratio.len());
    out.extend_from_slice(acoustic);
    out.extend_from_slice(bow);
    out.extend_from_slice(time);
    out.extend_from_slice(ratio);
    Ok(out)
}
