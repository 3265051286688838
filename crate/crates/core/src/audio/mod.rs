//! Utterance audio: loading, validation, and preprocessing.
//!
//! Clips are immutable once constructed; every operation here is a pure
//! function from clip to clip, so utterances can be processed concurrently
//! without shared state.

mod preprocess;
mod wav;

pub use preprocess::{normalize_energy, remove_silence, NormalizeOutcome, SilenceParams};
pub use wav::{load_wav, write_wav_16bit};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt file: {0}")]
    CorruptFile(String),
    #[error("audio is empty")]
    EmptyAudio,
    #[error("signal is degenerate (zero RMS)")]
    DegenerateSignal,
    #[error("clip too short: {got} samples, need at least {need}")]
    TooShort { got: usize, need: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Mono PCM utterance audio. Samples are finite and clamped to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
    source_id: String,
}

impl AudioClip {
    /// Build a clip, clamping samples into `[-1, 1]` and zeroing non-finite
    /// values on ingest.
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Self {
        assert!(sample_rate > 0, "sample_rate must be positive");
        let samples = samples
            .into_iter()
            .map(|s| if s.is_finite() { s.clamp(-1.0, 1.0) } else { 0.0 })
            .collect();
        Self {
            samples,
            sample_rate,
            source_id: source_id.into(),
        }
    }

    /// Rewrap already-validated samples without re-clamping. Callers must
    /// guarantee the `[-1, 1]` invariant.
    pub(crate) fn from_validated(samples: Vec<f64>, sample_rate: u32, source_id: String) -> Self {
        Self {
            samples,
            sample_rate,
            source_id,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    /// Root-mean-square amplitude over the whole clip.
    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let e: f64 = self.samples.iter().map(|s| s * s).sum();
        (e / self.samples.len() as f64).sqrt()
    }
}

/// Preprocessing arm selected per experiment run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PreprocessMode {
    /// Raw audio, no normalization.
    #[serde(rename = "wn")]
    WithoutNormalization,
    /// RMS scaled to a fixed target.
    #[serde(rename = "en")]
    EnergyNormalized,
    /// Low-energy runs excised.
    #[serde(rename = "sr")]
    SilenceRemoved,
}

impl PreprocessMode {
    pub fn label(self) -> &'static str {
        match self {
            PreprocessMode::WithoutNormalization => "WN",
            PreprocessMode::EnergyNormalized => "EN",
            PreprocessMode::SilenceRemoved => "SR",
        }
    }
}

impl std::str::FromStr for PreprocessMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "wn" => Ok(PreprocessMode::WithoutNormalization),
            "en" => Ok(PreprocessMode::EnergyNormalized),
            "sr" => Ok(PreprocessMode::SilenceRemoved),
            other => Err(format!("unknown preprocess mode `{other}` (expected wn, en, or sr)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ingest_clamps_and_scrubs() {
        let clip = AudioClip::new(vec![1.5, -2.0, 0.25, f64::NAN, f64::INFINITY], 16_000, "t");
        assert_eq!(clip.samples(), &[1.0, -1.0, 0.25, 0.0, 0.0]);
        assert!(clip.samples().iter().all(|s| s.is_finite() && s.abs() <= 1.0));
    }

    #[test]
    fn duration_is_len_over_rate() {
        let clip = AudioClip::new(vec![0.0; 19_200], 16_000, "t");
        assert!((clip.duration_seconds() - 1.2).abs() < 1e-12);
    }
}
