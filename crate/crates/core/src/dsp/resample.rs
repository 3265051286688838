//! Band-limited sample-rate conversion with a windowed-sinc kernel.

use crate::audio::AudioClip;

/// Zero crossings per side of the sinc kernel, at the lower of the two rates.
const KERNEL_HALF_ZEROS: f64 = 32.0;
/// Cutoff rolloff below Nyquist to leave room for the kernel transition band.
const ROLLOFF: f64 = 0.945;

fn blackman(x: f64) -> f64 {
    // x in [-1, 1]
    let t = std::f64::consts::PI * (x + 1.0);
    0.42 - 0.5 * t.cos() + 0.08 * (2.0 * t).cos()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Resample a clip to `target_rate`. Returns the clip unchanged (bitwise)
/// when the rates already match.
pub fn resample(clip: &AudioClip, target_rate: u32) -> AudioClip {
    assert!(target_rate > 0);
    let in_rate = clip.sample_rate();
    if in_rate == target_rate || clip.is_empty() {
        return clip.clone();
    }

    let x = clip.samples();
    let n_in = x.len();
    let ratio = f64::from(in_rate) / f64::from(target_rate);
    let n_out = ((n_in as u64 * u64::from(target_rate) + u64::from(in_rate) / 2)
        / u64::from(in_rate)) as usize;

    // Stretch the kernel when downsampling so the cutoff tracks the lower
    // Nyquist frequency.
    let downscale = ratio.max(1.0);
    let cutoff = ROLLOFF * 0.5 / downscale;
    let half_width = KERNEL_HALF_ZEROS * downscale;

    let mut out = Vec::with_capacity(n_out);
    for j in 0..n_out {
        let center = j as f64 * ratio;
        let lo = ((center - half_width).ceil() as i64).max(0);
        let hi = ((center + half_width).floor() as i64).min(n_in as i64 - 1);
        let mut acc = 0.0;
        let mut norm = 0.0;
        for i in lo..=hi {
            let d = i as f64 - center;
            let w = 2.0 * cutoff * sinc(2.0 * cutoff * d) * blackman(d / half_width);
            acc += w * x[i as usize];
            norm += w;
        }
        out.push(if norm.abs() > 1e-12 { acc / norm } else { 0.0 });
    }
    AudioClip::new(out, target_rate, clip.source_id().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::{num_complex::Complex, FftPlanner};

    fn tone(freq: f64, secs: f64, rate: u32, amp: f64) -> AudioClip {
        let n = (secs * f64::from(rate)).round() as usize;
        let samples = (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / f64::from(rate)).sin())
            .collect();
        AudioClip::new(samples, rate, "tone")
    }

    /// Independent spectrum check: FFT the resampled signal and locate the
    /// magnitude peak.
    fn fft_peak_hz(clip: &AudioClip) -> (f64, f64) {
        let n = clip.len().next_power_of_two();
        let mut buf: Vec<Complex<f64>> = clip
            .samples()
            .iter()
            .map(|&s| Complex::new(s, 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(n)
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let (k, _) = buf[1..n / 2]
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        let bin_hz = f64::from(clip.sample_rate()) / n as f64;
        (((k + 1) as f64) * bin_hz, bin_hz)
    }

    #[test]
    fn same_rate_is_bitwise_identity() {
        let clip = tone(100.0, 0.25, 16_000, 0.5);
        let out = resample(&clip, 16_000);
        assert_eq!(out.samples(), clip.samples());
        assert_eq!(out.sample_rate(), 16_000);
    }

    #[test]
    fn downsample_keeps_tone_at_its_frequency() {
        let clip = tone(100.0, 1.0, 48_000, 0.5);
        let out = resample(&clip, 16_000);
        assert_eq!(out.sample_rate(), 16_000);
        let (peak_hz, bin_hz) = fft_peak_hz(&out);
        assert!(
            (peak_hz - 100.0).abs() <= bin_hz,
            "peak at {peak_hz} Hz, bin width {bin_hz}"
        );
    }

    #[test]
    fn upsample_preserves_duration_within_one_sample() {
        let clip = tone(440.0, 0.5, 8_000, 0.5);
        let out = resample(&clip, 16_000);
        assert!((out.duration_seconds() - clip.duration_seconds()).abs() <= 1.0 / 8_000.0);
    }

    #[test]
    fn downsample_preserves_amplitude_roughly() {
        let clip = tone(100.0, 1.0, 48_000, 0.5);
        let out = resample(&clip, 16_000);
        let rms_in = clip.rms();
        let rms_out = out.rms();
        assert!((rms_out - rms_in).abs() / rms_in < 0.02);
    }
}
