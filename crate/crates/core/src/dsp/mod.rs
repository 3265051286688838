//! Frame-level signal processing shared by the feature extractor.

pub mod lpc;
pub mod mel;
pub mod pitch;
pub mod resample;

/// Analysis framing: 20 ms Hamming windows on a 10 ms hop, with every clip
/// resampled to 16 kHz before extraction.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct FrameConfig {
    pub window_ms: f64,
    pub hop_ms: f64,
    pub analysis_rate: u32,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            window_ms: 20.0,
            hop_ms: 10.0,
            analysis_rate: 16_000,
        }
    }
}

impl FrameConfig {
    pub fn window_len(&self) -> usize {
        ((self.window_ms / 1000.0 * f64::from(self.analysis_rate)).round() as usize).max(1)
    }

    pub fn hop_len(&self) -> usize {
        ((self.hop_ms / 1000.0 * f64::from(self.analysis_rate)).round() as usize).max(1)
    }

    /// Number of full analysis windows that fit in `n` samples.
    pub fn num_frames(&self, n: usize) -> usize {
        let win = self.window_len();
        if n < win {
            0
        } else {
            (n - win) / self.hop_len() + 1
        }
    }
}

/// Periodic-symmetric Hamming window.
pub fn hamming(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}
