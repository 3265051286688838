//! The 1582-dimensional acoustic feature vector.
//!
//! Per frame we compute 34 primary low-level descriptors (loudness, MFCC
//! 0-14, the 8 lowest log mel band energies, 8 LSP frequencies from an
//! 8th-order LPC, the smoothed F0 envelope, and unclipped voicing strength)
//! plus 4 voicing descriptors over voiced frames only (F0, jitter local/DDP,
//! shimmer). Each contour and its regression delta is summarized by a fixed
//! functional set: 21 functionals for the primary contours, 19 for the
//! voicing contours, plus the pitch onset count and utterance duration:
//!
//!   (34 + 34) * 21 + (4 + 4) * 19 + 2 = 1428 + 152 + 2 = 1582

mod functionals;
pub mod io;

pub use functionals::{
    apply_functionals, functional_names, linear_quantile, PRIMARY_FUNCTIONAL_COUNT,
    VOICING_FUNCTIONAL_COUNT,
};

use crate::audio::{AudioClip, AudioError};
use crate::dsp::lpc::frame_lsp;
use crate::dsp::mel::MelAnalyzer;
use crate::dsp::pitch::{frame_pitch, region_voice_quality, FramePitch, PitchConfig};
use crate::dsp::resample::resample;
use crate::dsp::{hamming, FrameConfig};
use std::sync::OnceLock;

pub const NUM_PRIMARY_LLD: usize = 34;
pub const NUM_VOICING_LLD: usize = 4;
pub const IS10_DIM: usize =
    2 * NUM_PRIMARY_LLD * PRIMARY_FUNCTIONAL_COUNT + 2 * NUM_VOICING_LLD * VOICING_FUNCTIONAL_COUNT + 2;

/// Frame energy floor: -87 dB as a power ratio (10^-8.7).
const LOUDNESS_FLOOR: f64 = 1.9952623149688795e-9;
/// Smoothing constant for the held F0 envelope.
const F0_ENV_ALPHA: f64 = 0.3;

/// Per-frame LLD contours and their deltas. Primary contours cover every
/// frame; voicing contours cover voiced frames only, concatenated across
/// voiced regions.
#[derive(Debug, Clone)]
pub struct LldMatrix {
    /// `[NUM_PRIMARY_LLD][n_frames]`
    pub primary: Vec<Vec<f64>>,
    pub primary_delta: Vec<Vec<f64>>,
    /// `[NUM_VOICING_LLD][n_voiced_frames]`
    pub voicing: Vec<Vec<f64>>,
    pub voicing_delta: Vec<Vec<f64>>,
    /// Unvoiced-to-voiced transitions.
    pub pitch_onset_count: usize,
    pub duration_s: f64,
}

impl LldMatrix {
    pub fn n_frames(&self) -> usize {
        self.primary[0].len()
    }

    pub fn n_voiced_frames(&self) -> usize {
        self.voicing[0].len()
    }
}

/// The fixed 1582-entry feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Is10Vector {
    pub values: Vec<f64>,
}

impl Is10Vector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn primary_lld_names() -> Vec<String> {
    let mut names = Vec::with_capacity(NUM_PRIMARY_LLD);
    names.push("pcm_loudness".to_string());
    for i in 0..15 {
        names.push(format!("mfcc[{i}]"));
    }
    for i in 0..8 {
        names.push(format!("logMelFreqBand[{i}]"));
    }
    for i in 0..8 {
        names.push(format!("lspFreq[{i}]"));
    }
    names.push("F0finEnv".to_string());
    names.push("voicingFinalUnclipped".to_string());
    names
}

fn voicing_lld_names() -> [&'static str; NUM_VOICING_LLD] {
    ["F0final", "jitterLocal", "jitterDDP", "shimmerLocal"]
}

/// Stable name for every slot of the vector, in emission order: primary
/// contours then their deltas (21 functionals each), voicing contours then
/// their deltas (19 each), then the two scalar tails.
pub fn index_map() -> &'static [String] {
    static MAP: OnceLock<Vec<String>> = OnceLock::new();
    MAP.get_or_init(|| {
        let mut names = Vec::with_capacity(IS10_DIM);
        let funcs = functional_names();
        for suffix in ["", "_de"] {
            for lld in primary_lld_names() {
                for f in funcs.iter().take(PRIMARY_FUNCTIONAL_COUNT) {
                    names.push(format!("{lld}{suffix}_{f}"));
                }
            }
        }
        for suffix in ["", "_de"] {
            for lld in voicing_lld_names() {
                for f in funcs.iter().take(VOICING_FUNCTIONAL_COUNT) {
                    names.push(format!("{lld}{suffix}_{f}"));
                }
            }
        }
        names.push("pitchOnsetCount".to_string());
        names.push("durationSeconds".to_string());
        assert_eq!(names.len(), IS10_DIM);
        names
    })
}

/// Second-order regression delta (window of +/-2 frames, replicate padding).
/// A constant contour maps to an identically zero delta.
pub fn regression_delta(contour: &[f64]) -> Vec<f64> {
    let n = contour.len();
    if n == 0 {
        return Vec::new();
    }
    let at = |i: i64| contour[i.clamp(0, n as i64 - 1) as usize];
    (0..n as i64)
        .map(|t| ((at(t + 1) - at(t - 1)) + 2.0 * (at(t + 2) - at(t - 2))) / 10.0)
        .collect()
}

/// Reusable extractor holding the FFT plan, window, and pitch settings.
/// One per worker; extraction itself is pure.
pub struct Is10Extractor {
    cfg: FrameConfig,
    pitch_cfg: PitchConfig,
    mel: MelAnalyzer,
    window: Vec<f64>,
}

impl Is10Extractor {
    pub fn new(cfg: FrameConfig) -> Self {
        let window = hamming(cfg.window_len());
        let mel = MelAnalyzer::new(cfg.analysis_rate, cfg.window_len());
        Self {
            cfg,
            pitch_cfg: PitchConfig::default(),
            mel,
            window,
        }
    }

    pub fn config(&self) -> &FrameConfig {
        &self.cfg
    }

    /// Resample to the analysis rate, compute LLDs, apply functionals.
    /// Deterministic: identical clip bytes give identical vector bytes.
    pub fn extract(&self, clip: &AudioClip) -> Result<Is10Vector, AudioError> {
        let llds = self.compute_llds_resampled(clip)?;
        Ok(apply_functionals(&llds))
    }

    pub fn compute_llds_resampled(&self, clip: &AudioClip) -> Result<LldMatrix, AudioError> {
        if clip.is_empty() {
            return Err(AudioError::EmptyAudio);
        }
        let clip = resample(clip, self.cfg.analysis_rate);
        self.compute_llds(&clip)
    }

    /// LLD contours for a clip already at the analysis rate.
    pub fn compute_llds(&self, clip: &AudioClip) -> Result<LldMatrix, AudioError> {
        assert_eq!(
            clip.sample_rate(),
            self.cfg.analysis_rate,
            "clip must be at the analysis rate"
        );
        let samples = clip.samples();
        let win = self.cfg.window_len();
        let hop = self.cfg.hop_len();
        let n_frames = self.cfg.num_frames(samples.len());
        if n_frames == 0 {
            return Err(AudioError::TooShort {
                got: samples.len(),
                need: win,
            });
        }
        let rate = f64::from(self.cfg.analysis_rate);

        let mut primary: Vec<Vec<f64>> = vec![Vec::with_capacity(n_frames); NUM_PRIMARY_LLD];
        let mut pitches: Vec<FramePitch> = Vec::with_capacity(n_frames);
        let mut windowed = vec![0.0f64; win];

        for f in 0..n_frames {
            let start = f * hop;
            let raw = &samples[start..start + win];
            for (w, (&s, &h)) in windowed.iter_mut().zip(raw.iter().zip(&self.window)) {
                *w = s * h;
            }

            let energy = raw.iter().map(|s| s * s).sum::<f64>() / win as f64;
            let loudness = energy.max(LOUDNESS_FLOOR).ln();

            let power = self.mel.power_spectrum(&windowed);
            let mels = self.mel.mel_energies(&power);
            let log_mels = self.mel.log_mels(&mels);
            let mfcc = self.mel.mfcc(&log_mels);
            let lsp = frame_lsp(&windowed);
            // Pitch gets a longer raw segment (up to two windows) so that
            // large-lag candidates keep enough correlation overlap.
            let pitch_segment = &samples[start..(start + 2 * win).min(samples.len())];
            let pitch = frame_pitch(pitch_segment, rate, &self.pitch_cfg);

            let mut k = 0;
            primary[k].push(loudness);
            k += 1;
            for &c in &mfcc {
                primary[k].push(c);
                k += 1;
            }
            for &b in &log_mels[..8] {
                primary[k].push(b);
                k += 1;
            }
            for &w in &lsp {
                primary[k].push(w);
                k += 1;
            }
            // F0finEnv is filled after the frame loop; reserve the slot order.
            primary[k].push(0.0);
            k += 1;
            primary[k].push(pitch.voicing);
            debug_assert_eq!(k + 1, NUM_PRIMARY_LLD);
            pitches.push(pitch);
        }

        // Held-and-smoothed F0 envelope over all frames.
        let env_idx = NUM_PRIMARY_LLD - 2;
        let mut held = 0.0f64;
        let mut env = 0.0f64;
        for (f, p) in pitches.iter().enumerate() {
            if p.voiced {
                held = p.f0;
            }
            env = if f == 0 {
                held
            } else {
                F0_ENV_ALPHA * held + (1.0 - F0_ENV_ALPHA) * env
            };
            primary[env_idx][f] = env;
        }

        // Voiced regions: maximal runs of voiced frames.
        let mut regions: Vec<(usize, usize)> = Vec::new();
        let mut f = 0;
        while f < n_frames {
            if !pitches[f].voiced {
                f += 1;
                continue;
            }
            let start = f;
            while f < n_frames && pitches[f].voiced {
                f += 1;
            }
            regions.push((start, f));
        }
        let pitch_onset_count = regions.len();

        let mut voicing: Vec<Vec<f64>> = vec![Vec::new(); NUM_VOICING_LLD];
        for &(r0, r1) in &regions {
            let sample_start = r0 * hop;
            let sample_end = ((r1 - 1) * hop + win).min(samples.len());
            let mean_f0 = pitches[r0..r1].iter().map(|p| p.f0).sum::<f64>() / (r1 - r0) as f64;
            let q = region_voice_quality(samples, sample_start, sample_end, mean_f0, rate);
            for p in &pitches[r0..r1] {
                voicing[0].push(p.f0);
                voicing[1].push(q.jitter_local);
                voicing[2].push(q.jitter_ddp);
                voicing[3].push(q.shimmer_local);
            }
        }

        let primary_delta = primary.iter().map(|c| regression_delta(c)).collect();
        let voicing_delta = voicing.iter().map(|c| regression_delta(c)).collect();

        Ok(LldMatrix {
            primary,
            primary_delta,
            voicing,
            voicing_delta,
            pitch_onset_count,
            duration_s: clip.duration_seconds(),
        })
    }
}

/// One-shot extraction with a fresh extractor.
pub fn extract_is10(clip: &AudioClip, cfg: &FrameConfig) -> Result<Is10Vector, AudioError> {
    Is10Extractor::new(*cfg).extract(clip)
}
