//! Child/adult classification of short TV voice commands.
//!
//! The pipeline fuses three signal domains: an IS10-style 1582-dimensional
//! acoustic feature vector, a bag-of-words model over command transcripts,
//! and per-device usage metadata (time-of-day one-hots and kids-content
//! ratios). Per-domain models (linear SVM, random forest, MLP) are combined
//! either by feature concatenation or by AdaBoost stacking over the base
//! models' class probabilities.

pub mod audio;
pub mod context;
pub mod dsp;
pub mod eval;
pub mod features;
pub mod fusion;
pub mod learn;
pub mod pipeline;
pub mod seed;
pub mod synth;
