//! Mel filterbank, log mel band energies, and MFCCs.
//!
//! 26 triangular filters spanning 0–8000 Hz on the HTK mel scale, applied to
//! the power spectrum of a Hamming-windowed frame. MFCC 0–14 come from an
//! orthonormal DCT-II of the 26 log energies with sinusoidal liftering
//! (L = 22). Band energies are floored before the log so digital silence
//! stays finite.

use rustfft::{num_complex::Complex, Fft, FftPlanner};
use std::sync::Arc;

pub const NUM_FILTERS: usize = 26;
pub const NUM_MFCC: usize = 15;
pub const NUM_LOG_BANDS: usize = 8;
const LIFTER_L: f64 = 22.0;
const ENERGY_FLOOR: f64 = 1e-20;

fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Per-worker spectral front end: cached FFT plan plus precomputed filter
/// weights. Not shared across threads; clone one per worker instead.
pub struct MelAnalyzer {
    fft: Arc<dyn Fft<f64>>,
    fft_size: usize,
    /// Triangular weights per filter over spectrum bins: (first_bin, weights).
    filters: Vec<(usize, Vec<f64>)>,
    /// DCT-II basis, orthonormal: dct[k][m].
    dct: Vec<Vec<f64>>,
    lifter: Vec<f64>,
}

impl MelAnalyzer {
    pub fn new(sample_rate: u32, window_len: usize) -> Self {
        let fft_size = window_len.next_power_of_two().max(256);
        let n_bins = fft_size / 2 + 1;
        let bin_hz = f64::from(sample_rate) / fft_size as f64;
        let f_max = (f64::from(sample_rate) / 2.0).min(8_000.0);

        let mel_lo = hz_to_mel(0.0);
        let mel_hi = hz_to_mel(f_max);
        let edges: Vec<f64> = (0..NUM_FILTERS + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (NUM_FILTERS + 1) as f64))
            .collect();

        let mut filters = Vec::with_capacity(NUM_FILTERS);
        for m in 0..NUM_FILTERS {
            let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            let first_bin = (lo / bin_hz).ceil() as usize;
            let last_bin = ((hi / bin_hz).floor() as usize).min(n_bins - 1);
            let mut weights = Vec::new();
            for k in first_bin..=last_bin {
                let f = k as f64 * bin_hz;
                let w = if f <= center {
                    if center > lo { (f - lo) / (center - lo) } else { 1.0 }
                } else if hi > center {
                    (hi - f) / (hi - center)
                } else {
                    1.0
                };
                weights.push(w.max(0.0));
            }
            filters.push((first_bin, weights));
        }

        let n = NUM_FILTERS as f64;
        let dct = (0..NUM_MFCC)
            .map(|k| {
                let scale = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
                (0..NUM_FILTERS)
                    .map(|m| {
                        scale
                            * (std::f64::consts::PI * k as f64 * (m as f64 + 0.5) / n).cos()
                    })
                    .collect()
            })
            .collect();

        let lifter = (0..NUM_MFCC)
            .map(|k| 1.0 + LIFTER_L / 2.0 * (std::f64::consts::PI * k as f64 / LIFTER_L).sin())
            .collect();

        Self {
            fft: FftPlanner::new().plan_fft_forward(fft_size),
            fft_size,
            filters,
            dct,
            lifter,
        }
    }

    /// Power spectrum of a (windowed) frame, zero-padded to the FFT size.
    pub fn power_spectrum(&self, frame: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex<f64>> = frame
            .iter()
            .map(|&s| Complex::new(s, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(self.fft_size)
            .collect();
        self.fft.process(&mut buf);
        buf[..self.fft_size / 2 + 1].iter().map(|c| c.norm_sqr()).collect()
    }

    /// Mel band energies of a power spectrum.
    pub fn mel_energies(&self, power: &[f64]) -> [f64; NUM_FILTERS] {
        let mut out = [0.0; NUM_FILTERS];
        for (m, (first, weights)) in self.filters.iter().enumerate() {
            out[m] = weights
                .iter()
                .enumerate()
                .map(|(i, w)| w * power[first + i])
                .sum();
        }
        out
    }

    /// Natural-log mel band energies (floored), lowest `NUM_LOG_BANDS` of
    /// which feed the logMelFreqBand contours.
    pub fn log_mels(&self, energies: &[f64; NUM_FILTERS]) -> [f64; NUM_FILTERS] {
        let mut out = [0.0; NUM_FILTERS];
        for (o, &e) in out.iter_mut().zip(energies.iter()) {
            *o = e.max(ENERGY_FLOOR).ln();
        }
        out
    }

    /// Liftered MFCC 0–14 from log mel energies.
    pub fn mfcc(&self, log_mels: &[f64; NUM_FILTERS]) -> [f64; NUM_MFCC] {
        let mut out = [0.0; NUM_MFCC];
        for k in 0..NUM_MFCC {
            let c: f64 = self.dct[k]
                .iter()
                .zip(log_mels.iter())
                .map(|(b, v)| b * v)
                .sum();
            out[k] = c * self.lifter[k];
        }
        out
    }
}
