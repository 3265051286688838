//! Silence removal and energy normalization.
//!
//! Silence removal is a frame-RMS gate: 25 ms windows on a 10 ms hop, a frame
//! is silent when its RMS falls below a threshold relative to the loudest
//! frame, and runs of silent frames spanning at least `min_silence_ms` are
//! excised (the union of their windows, so surviving samples are an exact
//! subsequence of the input).

use super::{AudioClip, AudioError};

/// Knobs for the frame-RMS silence gate.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SilenceParams {
    /// Threshold in dB relative to the peak frame RMS. Must be negative.
    pub threshold_db: f64,
    /// Minimum silent-run span before anything is excised.
    pub min_silence_ms: f64,
    pub window_ms: f64,
    pub hop_ms: f64,
}

impl Default for SilenceParams {
    fn default() -> Self {
        Self {
            threshold_db: -35.0,
            min_silence_ms: 200.0,
            window_ms: 25.0,
            hop_ms: 10.0,
        }
    }
}

fn frame_rms(samples: &[f64]) -> f64 {
    let e: f64 = samples.iter().map(|s| s * s).sum();
    (e / samples.len() as f64).sqrt()
}

/// Excise low-energy runs from a clip.
///
/// Returns `EmptyAudio` when the whole clip is silent (zero peak RMS) or when
/// nothing survives the gate; callers should skip and log such utterances.
pub fn remove_silence(clip: &AudioClip, params: &SilenceParams) -> Result<AudioClip, AudioError> {
    assert!(params.threshold_db < 0.0, "threshold_db must be negative");
    assert!(params.min_silence_ms >= 0.0);
    if clip.is_empty() {
        return Err(AudioError::EmptyAudio);
    }

    let rate = f64::from(clip.sample_rate());
    let win = ((params.window_ms / 1000.0 * rate).round() as usize).max(1);
    let hop = ((params.hop_ms / 1000.0 * rate).round() as usize).max(1);
    let samples = clip.samples();
    let n = samples.len();

    // Frame i covers [i*hop, i*hop + win), truncated at the signal end.
    let mut rms = Vec::new();
    let mut start = 0usize;
    while start < n {
        let end = (start + win).min(n);
        rms.push(frame_rms(&samples[start..end]));
        start += hop;
    }

    let peak = rms.iter().cloned().fold(0.0f64, f64::max);
    if peak <= 0.0 {
        return Err(AudioError::EmptyAudio);
    }
    let gate = peak * 10f64.powf(params.threshold_db / 20.0);
    let silent: Vec<bool> = rms.iter().map(|&r| r < gate).collect();

    // Mark the union of windows of qualifying silent runs for removal.
    let mut remove = vec![false; n];
    let mut i = 0usize;
    while i < silent.len() {
        if !silent[i] {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < silent.len() && silent[i] {
            i += 1;
        }
        let span_start = run_start * hop;
        let span_end = (((i - 1) * hop) + win).min(n);
        let span_ms = (span_end - span_start) as f64 / rate * 1000.0;
        if span_ms >= params.min_silence_ms {
            remove[span_start..span_end].iter_mut().for_each(|r| *r = true);
        }
    }

    let kept: Vec<f64> = samples
        .iter()
        .zip(&remove)
        .filter(|(_, &r)| !r)
        .map(|(&s, _)| s)
        .collect();
    if kept.is_empty() {
        return Err(AudioError::EmptyAudio);
    }
    Ok(AudioClip::from_validated(
        kept,
        clip.sample_rate(),
        clip.source_id().to_string(),
    ))
}

/// Result of energy normalization: the scaled clip plus how many samples hit
/// the hard clip at full scale.
#[derive(Debug, Clone)]
pub struct NormalizeOutcome {
    pub clip: AudioClip,
    pub clipped_samples: usize,
}

/// Scale a clip to the target RMS, hard-clipping anything that leaves
/// `[-1, 1]` and reporting the clip count.
pub fn normalize_energy(clip: &AudioClip, target_rms: f64) -> Result<NormalizeOutcome, AudioError> {
    assert!(target_rms > 0.0, "target_rms must be positive");
    let rms = clip.rms();
    if rms <= 0.0 {
        return Err(AudioError::DegenerateSignal);
    }
    let gain = target_rms / rms;
    let mut clipped = 0usize;
    let samples: Vec<f64> = clip
        .samples()
        .iter()
        .map(|&s| {
            let v = s * gain;
            if v.abs() > 1.0 {
                clipped += 1;
                v.clamp(-1.0, 1.0)
            } else {
                v
            }
        })
        .collect();
    Ok(NormalizeOutcome {
        clip: AudioClip::from_validated(samples, clip.sample_rate(), clip.source_id().to_string()),
        clipped_samples: clipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::PreprocessMode;

    fn tone(freq: f64, secs: f64, rate: u32, amp: f64) -> Vec<f64> {
        let n = (secs * f64::from(rate)).round() as usize;
        (0..n)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / f64::from(rate)).sin())
            .collect()
    }

    /// Independent reimplementation of the frame-energy gate used as the
    /// oracle for silence-removal expectations: counts the samples that
    /// should survive given the declared windowing rule.
    fn expected_survivors(samples: &[f64], rate: u32, params: &SilenceParams) -> usize {
        let rate_f = f64::from(rate);
        let win = (params.window_ms / 1000.0 * rate_f).round() as usize;
        let hop = (params.hop_ms / 1000.0 * rate_f).round() as usize;
        let n = samples.len();
        let mut frames = Vec::new();
        let mut s = 0;
        while s < n {
            let e = (s + win).min(n);
            let energy: f64 = samples[s..e].iter().map(|x| x * x).sum();
            frames.push((s, e, (energy / (e - s) as f64).sqrt()));
            s += hop;
        }
        let peak = frames.iter().map(|f| f.2).fold(0.0f64, f64::max);
        let gate = peak * 10f64.powf(params.threshold_db / 20.0);
        let mut removed = vec![false; n];
        let mut i = 0;
        while i < frames.len() {
            if frames[i].2 >= gate {
                i += 1;
                continue;
            }
            let first = i;
            while i < frames.len() && frames[i].2 < gate {
                i += 1;
            }
            let span = (frames[first].0, frames[i - 1].1);
            if (span.1 - span.0) as f64 / rate_f * 1000.0 >= params.min_silence_ms {
                removed[span.0..span.1].iter_mut().for_each(|r| *r = true);
            }
        }
        removed.iter().filter(|&&r| !r).count()
    }

    #[test]
    fn tone_silence_tone_loses_the_silent_half_second() {
        let rate = 16_000;
        let mut samples = tone(440.0, 0.5, rate, 0.5);
        samples.extend(std::iter::repeat(0.0).take(8_000));
        samples.extend(tone(440.0, 0.5, rate, 0.5));
        let clip = AudioClip::new(samples.clone(), rate, "t");
        let params = SilenceParams::default();

        let out = remove_silence(&clip, &params).unwrap();
        let expected = expected_survivors(&samples, rate, &params);
        assert_eq!(out.len(), expected);

        // Analytic expectation: the 0.5 s silent stretch disappears, so the
        // survivor is ~1.0 s within one hop.
        let hop_s = params.hop_ms / 1000.0;
        assert!(
            (out.duration_seconds() - 1.0).abs() <= hop_s + 1e-9,
            "duration {} not within one hop of 1.0",
            out.duration_seconds()
        );
    }

    #[test]
    fn no_silent_frame_is_a_noop() {
        let clip = AudioClip::new(tone(300.0, 0.4, 16_000, 0.5), 16_000, "t");
        let out = remove_silence(&clip, &SilenceParams::default()).unwrap();
        assert_eq!(out.samples(), clip.samples());
    }

    #[test]
    fn all_zeros_is_empty_audio() {
        let clip = AudioClip::new(vec![0.0; 16_000], 16_000, "t");
        assert!(matches!(
            remove_silence(&clip, &SilenceParams::default()),
            Err(AudioError::EmptyAudio)
        ));
    }

    #[test]
    fn removal_is_idempotent_on_constructed_signals() {
        let rate = 16_000;
        for silence_secs in [0.3, 0.5, 1.0] {
            let mut samples = tone(250.0, 0.4, rate, 0.4);
            samples.extend(std::iter::repeat(0.0).take((silence_secs * 16_000.0) as usize));
            samples.extend(tone(250.0, 0.4, rate, 0.4));
            let params = SilenceParams::default();
            let once = remove_silence(&AudioClip::new(samples, rate, "t"), &params).unwrap();
            let twice = remove_silence(&once, &params).unwrap();
            assert_eq!(once.samples(), twice.samples());
        }
    }

    #[test]
    fn output_is_subsequence_and_never_longer() {
        let rate = 16_000;
        let mut samples = tone(200.0, 0.3, rate, 0.5);
        samples.extend(std::iter::repeat(0.0).take(5_000));
        samples.extend(tone(200.0, 0.2, rate, 0.3));
        let clip = AudioClip::new(samples, rate, "t");
        let out = remove_silence(&clip, &SilenceParams::default()).unwrap();
        assert!(out.len() <= clip.len());
        // Subsequence check: walk the input consuming output samples in order.
        let mut it = clip.samples().iter();
        for &o in out.samples() {
            assert!(it.any(|&s| s == o), "output sample missing from input order");
        }
    }

    #[test]
    fn gain_is_linear() {
        let clip = AudioClip::new(vec![0.1, -0.1, 0.1, -0.1], 16_000, "t");
        let rms = clip.rms();
        let out = normalize_energy(&clip, rms / 2.0).unwrap();
        assert_eq!(out.clipped_samples, 0);
        for (o, i) in out.clip.samples().iter().zip(clip.samples()) {
            assert!((o - i * 0.5).abs() < 1e-15);
        }
        assert!((out.clip.rms() - rms / 2.0).abs() / (rms / 2.0) < 1e-6);
    }

    #[test]
    fn normalizing_to_own_rms_is_identity() {
        let clip = AudioClip::new(tone(123.0, 0.2, 16_000, 0.37), 16_000, "t");
        let out = normalize_energy(&clip, clip.rms()).unwrap();
        assert_eq!(out.clip.samples(), clip.samples());
    }

    #[test]
    fn zero_signal_is_degenerate() {
        let clip = AudioClip::new(vec![0.0; 100], 16_000, "t");
        assert!(matches!(
            normalize_energy(&clip, 0.1),
            Err(AudioError::DegenerateSignal)
        ));
    }

    #[test]
    fn hot_recordings_clip_and_report() {
        let clip = AudioClip::new(vec![0.9, -0.9, 0.01, -0.01], 16_000, "t");
        let out = normalize_energy(&clip, 0.9).unwrap();
        assert!(out.clipped_samples >= 2);
        assert!(out.clip.samples().iter().all(|s| s.abs() <= 1.0));
    }

    #[test]
    fn mode_labels_parse_and_print() {
        for (s, m) in [
            ("wn", PreprocessMode::WithoutNormalization),
            ("en", PreprocessMode::EnergyNormalized),
            ("sr", PreprocessMode::SilenceRemoved),
        ] {
            assert_eq!(s.parse::<PreprocessMode>().unwrap(), m);
        }
        assert!("xx".parse::<PreprocessMode>().is_err());
    }
}
