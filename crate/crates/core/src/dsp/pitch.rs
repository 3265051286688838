//! Fundamental frequency, voicing, and cycle-level voice quality.
//!
//! Per-frame F0 comes from the normalized cross-correlation of raw
//! (un-windowed) samples over lags spanning 55-500 Hz, with parabolic peak
//! interpolation. The analysis segment extends up to two window lengths past
//! the frame start so low-lag/high-lag candidates keep enough correlation
//! overlap; a frame is voiced only when the winning peak clears the voicing
//! threshold with at least a quarter of the segment overlapping. Sub-octave
//! errors are suppressed by picking the smallest lag whose peak is within a
//! fixed ratio of the global maximum. Jitter and shimmer are measured on
//! cycle marks picked inside each voiced region and normalized by the mean
//! period/amplitude, so a perfectly periodic signal measures exactly zero.

#[derive(Debug, Clone, Copy)]
pub struct PitchConfig {
    pub f_min: f64,
    pub f_max: f64,
    /// NCC strength at or above which a frame counts as voiced.
    pub voicing_threshold: f64,
    /// Candidate peaks within this ratio of the best peak compete; the
    /// smallest lag (highest octave) wins.
    pub octave_peak_ratio: f64,
}

impl Default for PitchConfig {
    fn default() -> Self {
        Self {
            f_min: 55.0,
            f_max: 500.0,
            voicing_threshold: 0.45,
            octave_peak_ratio: 0.9,
        }
    }
}

/// F0 and voicing strength for one frame. `f0` is 0 when unvoiced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FramePitch {
    pub f0: f64,
    pub voicing: f64,
    pub voiced: bool,
}

/// Normalized cross-correlation pitch over a segment of raw samples starting
/// at the frame. Lags needing more than three quarters of the segment are
/// not eligible to mark the frame voiced.
pub fn frame_pitch(frame: &[f64], rate: f64, cfg: &PitchConfig) -> FramePitch {
    let n = frame.len();
    let unvoiced = FramePitch {
        f0: 0.0,
        voicing: 0.0,
        voiced: false,
    };
    if n < 4 {
        return unvoiced;
    }

    let lag_min = ((rate / cfg.f_max).floor() as usize).max(2);
    let lag_max = ((rate / cfg.f_min).ceil() as usize).min(n - 2);
    let voiceable_max = (3 * n) / 4;
    if lag_min >= lag_max {
        return unvoiced;
    }

    // Prefix energy sums make both normalization terms O(1) per lag.
    let mut cum = vec![0.0f64; n + 1];
    for (i, &s) in frame.iter().enumerate() {
        cum[i + 1] = cum[i] + s * s;
    }
    if cum[n] <= 0.0 {
        return unvoiced;
    }

    let ncc_at = |lag: usize| -> f64 {
        let overlap = n - lag;
        let num: f64 = frame[..overlap]
            .iter()
            .zip(&frame[lag..])
            .map(|(a, b)| a * b)
            .sum();
        let e0 = cum[overlap];
        let e1 = cum[n] - cum[lag];
        let denom = (e0 * e1).sqrt();
        if denom > 0.0 {
            num / denom
        } else {
            0.0
        }
    };

    let ncc: Vec<f64> = (lag_min.saturating_sub(1)..=lag_max + 1)
        .map(ncc_at)
        .collect();
    let base = lag_min - 1;

    // Local maxima with positive correlation are pitch candidates.
    let mut candidates: Vec<(usize, f64)> = Vec::new();
    for i in 1..ncc.len() - 1 {
        let lag = base + i;
        if lag < lag_min || lag > lag_max {
            continue;
        }
        if ncc[i] > 0.0 && ncc[i] > ncc[i - 1] && ncc[i] >= ncc[i + 1] {
            candidates.push((lag, ncc[i]));
        }
    }
    let Some(&(_, best)) = candidates
        .iter()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    else {
        return unvoiced;
    };
    let (lag, _) = *candidates
        .iter()
        .find(|(_, v)| *v >= cfg.octave_peak_ratio * best)
        .expect("at least the best candidate qualifies");

    // Parabolic interpolation around the integer peak.
    let i = lag - base;
    let (ym, y0, yp) = (ncc[i - 1], ncc[i], ncc[i + 1]);
    let denom = ym - 2.0 * y0 + yp;
    let delta = if denom.abs() > 1e-12 {
        (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    let refined_lag = lag as f64 + delta;
    let strength = (y0 - 0.25 * (ym - yp) * delta).clamp(0.0, 1.0);
    let f0 = (rate / refined_lag).clamp(cfg.f_min, cfg.f_max);

    if strength >= cfg.voicing_threshold && lag <= voiceable_max {
        FramePitch {
            f0,
            voicing: strength,
            voiced: true,
        }
    } else {
        FramePitch {
            f0: 0.0,
            voicing: strength,
            voiced: false,
        }
    }
}

/// Cycle-level measurements over one voiced region.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VoiceQuality {
    pub jitter_local: f64,
    pub jitter_ddp: f64,
    pub shimmer_local: f64,
}

/// Parabolic refinement of an integer peak: fractional position offset and
/// interpolated amplitude.
fn refine_peak(samples: &[f64], idx: usize) -> (f64, f64) {
    if idx == 0 || idx + 1 >= samples.len() {
        return (idx as f64, samples[idx]);
    }
    let (ym, y0, yp) = (samples[idx - 1], samples[idx], samples[idx + 1]);
    let denom = ym - 2.0 * y0 + yp;
    if denom.abs() < 1e-300 {
        return (idx as f64, y0);
    }
    let delta = (0.5 * (ym - yp) / denom).clamp(-0.5, 0.5);
    (idx as f64 + delta, y0 - 0.25 * (ym - yp) * delta)
}

fn argmax(samples: &[f64], lo: usize, hi: usize) -> Option<usize> {
    if lo >= hi || hi > samples.len() {
        return None;
    }
    let mut best = lo;
    for i in lo + 1..hi {
        if samples[i] > samples[best] {
            best = i;
        }
    }
    Some(best)
}

/// Pick per-cycle peak marks in `samples[start..end)` guided by the region's
/// mean F0, then measure jitter and shimmer on the mark sequence. Regions too
/// short for a difference sequence report zeros.
pub fn region_voice_quality(
    samples: &[f64],
    start: usize,
    end: usize,
    mean_f0: f64,
    rate: f64,
) -> VoiceQuality {
    let out = VoiceQuality::default();
    if mean_f0 <= 0.0 || end <= start {
        return out;
    }
    let period0 = rate / mean_f0;
    let end = end.min(samples.len());

    // Marks must be true interior local maxima so the parabolic refinement is
    // well defined; a boundary pick would skew one period and fake jitter.
    let is_peak = |i: usize| -> bool {
        i > 0 && i + 1 < samples.len() && samples[i] >= samples[i - 1] && samples[i] >= samples[i + 1]
    };

    // First mark: strongest peak within one nominal period of the region start.
    let first_hi = (start + period0.ceil() as usize + 1).min(end);
    let Some(first) = argmax(samples, start, first_hi) else {
        return out;
    };
    if !is_peak(first) {
        return out;
    }

    let mut marks_i = vec![first];
    let mut period = period0;
    loop {
        let prev = *marks_i.last().expect("non-empty");
        let lo = prev + (0.7 * period).floor().max(1.0) as usize;
        let hi = prev + (1.3 * period).ceil() as usize + 1;
        if hi > end {
            // Never search a truncated window; a clipped argmax is not a cycle.
            break;
        }
        let Some(next) = argmax(samples, lo, hi) else {
            break;
        };
        if !is_peak(next) {
            break;
        }
        period = ((next - prev) as f64).clamp(rate / 500.0, rate / 55.0);
        marks_i.push(next);
    }

    let refined: Vec<(f64, f64)> = marks_i.iter().map(|&i| refine_peak(samples, i)).collect();
    let positions: Vec<f64> = refined.iter().map(|r| r.0).collect();
    let amplitudes: Vec<f64> = refined.iter().map(|r| r.1.abs()).collect();

    let periods: Vec<f64> = positions.windows(2).map(|w| w[1] - w[0]).collect();
    let mean_period = if periods.is_empty() {
        0.0
    } else {
        periods.iter().sum::<f64>() / periods.len() as f64
    };

    let mut q = VoiceQuality::default();
    if periods.len() >= 2 && mean_period > 0.0 {
        let abs_diff: f64 = periods.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        q.jitter_local = abs_diff / (periods.len() - 1) as f64 / mean_period;
    }
    if periods.len() >= 3 && mean_period > 0.0 {
        let abs_dd: f64 = periods
            .windows(3)
            .map(|w| (w[2] - 2.0 * w[1] + w[0]).abs())
            .sum();
        q.jitter_ddp = abs_dd / (periods.len() - 2) as f64 / mean_period;
    }
    if amplitudes.len() >= 2 {
        let mean_amp = amplitudes.iter().sum::<f64>() / amplitudes.len() as f64;
        if mean_amp > 0.0 {
            let abs_diff: f64 = amplitudes.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
            q.shimmer_local = abs_diff / (amplitudes.len() - 1) as f64 / mean_amp;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, n: usize, rate: f64, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / rate).sin())
            .collect()
    }

    fn sawtooth(period: usize, n: usize, amp: f64) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * ((i % period) as f64 / period as f64) - 1.0))
            .collect()
    }

    /// Zero-crossing frequency estimate, the independent oracle for pure
    /// tones: count rising crossings over the span between first and last.
    fn zero_crossing_hz(samples: &[f64], rate: f64) -> f64 {
        let mut crossings = Vec::new();
        for i in 1..samples.len() {
            if samples[i - 1] < 0.0 && samples[i] >= 0.0 {
                crossings.push(i);
            }
        }
        if crossings.len() < 2 {
            return 0.0;
        }
        let span = (crossings[crossings.len() - 1] - crossings[0]) as f64;
        (crossings.len() - 1) as f64 * rate / span
    }

    #[test]
    fn pure_tones_detected_within_three_percent() {
        let cfg = PitchConfig::default();
        for freq in [110.0, 220.0, 330.0, 440.0] {
            let s = sine(freq, 320, 16_000.0, 0.5);
            let oracle = zero_crossing_hz(&s, 16_000.0);
            assert!((oracle - freq).abs() / freq < 0.02, "oracle sanity");
            let p = frame_pitch(&s, 16_000.0, &cfg);
            assert!(p.voiced, "{freq} Hz frame should be voiced");
            assert!(
                (p.f0 - freq).abs() / freq < 0.03,
                "{freq} Hz detected as {}",
                p.f0
            );
            assert!(p.voicing > 0.9);
        }
    }

    #[test]
    fn silence_and_noise_are_unvoiced() {
        let cfg = PitchConfig::default();
        assert!(!frame_pitch(&vec![0.0; 320], 16_000.0, &cfg).voiced);
        let mut state = 12345u64;
        let noise: Vec<f64> = (0..640)
            .map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (state >> 32) as f64 / 4294967296.0 * 2.0 - 1.0
            })
            .collect();
        let p = frame_pitch(&noise, 16_000.0, &cfg);
        assert!(!p.voiced, "noise voiced with strength {}", p.voicing);
    }

    #[test]
    fn octave_rule_prefers_the_smallest_qualifying_lag() {
        // 200 Hz tone: peaks at lags 80, 160, 240; the 80-sample lag must win.
        let s = sine(200.0, 320, 16_000.0, 0.5);
        let p = frame_pitch(&s, 16_000.0, &PitchConfig::default());
        assert!((p.f0 - 200.0).abs() < 6.0, "got {}", p.f0);
    }

    #[test]
    fn periodic_sawtooth_has_zero_jitter() {
        let s = sawtooth(80, 16_000, 0.5); // exactly 200 Hz at 16 kHz
        let q = region_voice_quality(&s, 0, s.len(), 200.0, 16_000.0);
        assert!(q.jitter_local < 1e-6, "jitter_local {}", q.jitter_local);
        assert!(q.jitter_ddp < 1e-6, "jitter_ddp {}", q.jitter_ddp);
    }

    #[test]
    fn constant_amplitude_tone_has_zero_shimmer() {
        let s = sine(200.0, 16_000, 16_000.0, 0.5);
        let q = region_voice_quality(&s, 0, s.len(), 200.0, 16_000.0);
        assert!(q.shimmer_local < 1e-6, "shimmer {}", q.shimmer_local);
    }

    #[test]
    fn amplitude_modulation_shows_up_as_shimmer() {
        let rate = 16_000.0;
        let s: Vec<f64> = (0..16_000)
            .map(|i| {
                let t = i as f64 / rate;
                let env = 1.0 + 0.3 * (2.0 * std::f64::consts::PI * 5.0 * t).sin();
                0.3 * env * (2.0 * std::f64::consts::PI * 200.0 * t).sin()
            })
            .collect();
        let q = region_voice_quality(&s, 0, s.len(), 200.0, rate);
        assert!(q.shimmer_local > 1e-3, "shimmer {}", q.shimmer_local);
    }

    #[test]
    fn jitter_and_shimmer_are_invariant_to_doubling() {
        let s = sawtooth(73, 8_000, 0.35);
        let doubled: Vec<f64> = s.iter().map(|v| v * 2.0).collect();
        let q1 = region_voice_quality(&s, 0, s.len(), 16_000.0 / 73.0, 16_000.0);
        let q2 = region_voice_quality(&doubled, 0, s.len(), 16_000.0 / 73.0, 16_000.0);
        assert_eq!(q1, q2);
    }

    #[test]
    fn too_short_regions_report_zero() {
        let s = sine(200.0, 100, 16_000.0, 0.5);
        let q = region_voice_quality(&s, 0, 90, 200.0, 16_000.0);
        // One cycle only: no period differences to measure.
        assert_eq!(q.jitter_ddp, 0.0);
    }
}
