//! Desk-scale synthetic corpus generation.
//!
//! Stands in for the proprietary production data: a crude source-filter
//! voice (impulse train at a class-dependent F0 through two formant
//! resonators, plus a -40 dB noise floor and optional silence padding),
//! class-templated transcripts, and per-device usage logs with archetypal
//! kids-content patterns. The point is learnable class separation with
//! exact reproducibility, not realism: a fixed seed yields byte-identical
//! WAVs, manifest, and usage log.

use crate::audio::{write_wav_16bit, AudioClip};
use crate::context::{
    write_manifest, write_usage_log, ContentKind, Gender, Label, UsageEvent, UtteranceRecord,
};
use crate::seed::substream;
use chrono::TimeZone;
use chrono_tz::Tz;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Context(#[from] crate::context::ContextError),
    #[error(transparent)]
    Audio(#[from] crate::audio::AudioError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticCorpusSpec {
    pub n_utterances: usize,
    /// P(KID); the adult prior is the complement. Allocation is exact.
    pub kid_prior: f64,
    pub adult_f0_hz: (f64, f64),
    pub kid_f0_hz: (f64, f64),
    /// Multiplier on the formant frequencies for kid voices.
    pub kid_formant_shift: f64,
    pub duration_s: (f64, f64),
    pub sample_rate: u32,
    /// Leading/trailing noise-floor padding range, seconds per side.
    pub silence_padding_s: (f64, f64),
    pub adult_templates: Vec<String>,
    pub kid_templates: Vec<String>,
    pub n_devices: usize,
    pub usage_events_per_device: usize,
    pub timezones: Vec<String>,
    /// Complementary-signal layout: half the corpus is separable only
    /// acoustically, the other half only through transcripts and usage.
    pub complementary: bool,
    pub seed: u64,
}

impl Default for SyntheticCorpusSpec {
    fn default() -> Self {
        Self {
            n_utterances: 200,
            kid_prior: 0.5,
            adult_f0_hz: (85.0, 255.0),
            kid_f0_hz: (250.0, 400.0),
            kid_formant_shift: 1.3,
            duration_s: (0.6, 2.0),
            sample_rate: 16_000,
            silence_padding_s: (0.0, 0.3),
            adult_templates: [
                "watch cnn",
                "news",
                "watch the game tonight",
                "weather forecast",
                "record the late show",
                "action movies",
                "watch breaking news",
                "sports channel",
            ]
            .map(String::from)
            .to_vec(),
            kid_templates: [
                "watch spongebob",
                "play paw patrol",
                "watch cartoons",
                "peppa pig",
                "watch frozen again",
                "play bluey",
                "dinosaur show",
                "watch the lion movie",
            ]
            .map(String::from)
            .to_vec(),
            n_devices: 12,
            usage_events_per_device: 40,
            timezones: ["America/New_York", "America/Chicago", "America/Los_Angeles"]
                .map(String::from)
                .to_vec(),
            complementary: false,
            seed: 7,
        }
    }
}

/// Everything the generator wrote, with the manifest path first since that
/// is what downstream stages consume.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub manifest_path: PathBuf,
    pub usage_log_path: PathBuf,
    pub audio_dir: PathBuf,
    pub records: Vec<UtteranceRecord>,
    /// Per-record F0 actually sampled, for oracle checks.
    pub sampled_f0: Vec<f64>,
}

/// Second-order resonator cascade: the crude formant filter.
fn resonate(samples: &mut Vec<f64>, freq: f64, bandwidth: f64, rate: f64) {
    let r = (-std::f64::consts::PI * bandwidth / rate).exp();
    let w = 2.0 * std::f64::consts::PI * freq / rate;
    let a1 = 2.0 * r * w.cos();
    let a2 = -r * r;
    let gain = 1.0 - r; // tame the resonance gain
    let (mut y1, mut y2) = (0.0f64, 0.0f64);
    for s in samples.iter_mut() {
        let y = gain * *s + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        *s = y;
    }
}

/// Impulse-train source through the formant filter, normalized to peak 0.5,
/// with a noise floor 40 dB below the voiced RMS and silence padding.
fn synth_voice(
    f0: f64,
    formant_shift: f64,
    duration_s: f64,
    pad: (f64, f64),
    rate: u32,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let rate_f = f64::from(rate);
    let n = (duration_s * rate_f).round() as usize;
    let mut voiced = vec![0.0f64; n];
    let period = rate_f / f0;
    let mut t = 0.0f64;
    while (t.round() as usize) < n {
        voiced[t.round() as usize] = 1.0;
        t += period;
    }
    resonate(&mut voiced, 700.0 * formant_shift, 130.0, rate_f);
    resonate(&mut voiced, 1220.0 * formant_shift, 90.0, rate_f);

    let peak = voiced.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        let g = 0.5 / peak;
        voiced.iter_mut().for_each(|s| *s *= g);
    }
    let rms = (voiced.iter().map(|s| s * s).sum::<f64>() / n as f64).sqrt();
    // Uniform noise with RMS 40 dB below the voiced RMS.
    let noise_amp = rms * 0.01 * 3.0f64.sqrt();

    let lead = (rng.gen_range(pad.0..=pad.1) * rate_f).round() as usize;
    let trail = (rng.gen_range(pad.0..=pad.1) * rate_f).round() as usize;
    let mut out = Vec::with_capacity(lead + n + trail);
    for i in 0..lead + n + trail {
        let v = if i >= lead && i < lead + n {
            voiced[i - lead]
        } else {
            0.0
        };
        out.push((v + noise_amp * (rng.gen::<f64>() * 2.0 - 1.0)).clamp(-1.0, 1.0));
    }
    out
}

struct DeviceArchetype {
    id: String,
    timezone: String,
    /// Probability a request targets kids content, by local hour.
    kid_show_prob: fn(u32) -> f64,
    kid_household: bool,
}

fn kid_household_prob(hour: u32) -> f64 {
    if (7..21).contains(&hour) {
        0.65
    } else {
        0.1
    }
}

fn adult_household_prob(_hour: u32) -> f64 {
    0.05
}

/// Exact per-class allocation from the priors.
pub fn class_allocation(n: usize, kid_prior: f64) -> (usize, usize) {
    let kids = (kid_prior * n as f64).round() as usize;
    (n - kids, kids)
}

/// Generate WAVs, manifest, and usage log under `out_dir`. Returns the
/// manifest path and in-memory records. Deterministic in `spec.seed`.
pub fn generate_corpus(
    spec: &SyntheticCorpusSpec,
    out_dir: &Path,
) -> Result<GeneratedCorpus, SynthError> {
    let audio_dir = out_dir.join("audio");
    fs::create_dir_all(&audio_dir)?;

    let devices: Vec<DeviceArchetype> = (0..spec.n_devices.max(2))
        .map(|i| {
            let kid_household = i % 2 == 0;
            DeviceArchetype {
                id: format!("dev-{i:03}"),
                timezone: spec.timezones[i % spec.timezones.len()].clone(),
                kid_show_prob: if kid_household {
                    kid_household_prob
                } else {
                    adult_household_prob
                },
                kid_household,
            }
        })
        .collect();

    // Exact class allocation, then a deterministic shuffle of the order.
    let (n_adult, n_kid) = class_allocation(spec.n_utterances, spec.kid_prior);
    let mut classes: Vec<Label> = std::iter::repeat(Label::Adult)
        .take(n_adult)
        .chain(std::iter::repeat(Label::Kid).take(n_kid))
        .collect();
    use rand::seq::SliceRandom;
    classes.shuffle(&mut substream(spec.seed, "order", 0));

    let base_day = 1u32; // June 2024, no DST transitions in these zones
    let mut records = Vec::with_capacity(spec.n_utterances);
    let mut sampled_f0 = Vec::with_capacity(spec.n_utterances);

    for (i, &label) in classes.iter().enumerate() {
        let mut rng = substream(spec.seed, "utt", i as u64);
        let kid = label == Label::Kid;
        // Complementary layout: even rows carry the acoustic signal, odd
        // rows carry the metadata signal.
        let acoustic_informative = !spec.complementary || i % 2 == 0;
        let metadata_informative = !spec.complementary || i % 2 == 1;

        let gender = if kid {
            Gender::Kid
        } else if rng.gen::<bool>() {
            Gender::Female
        } else {
            Gender::Male
        };
        let (f0, shift) = if acoustic_informative {
            let range = match (kid, gender) {
                (true, _) => spec.kid_f0_hz,
                (false, Gender::Male) => (spec.adult_f0_hz.0, 160.0),
                (false, _) => (170.0, spec.adult_f0_hz.1),
            };
            let shift = if kid { spec.kid_formant_shift } else { 1.0 };
            (rng.gen_range(range.0..=range.1), shift)
        } else {
            // Overlapping band, shared formants: acoustically uninformative.
            (rng.gen_range(180.0..=230.0), 1.0)
        };

        let duration = rng.gen_range(spec.duration_s.0..=spec.duration_s.1);
        let samples = synth_voice(
            f0,
            shift,
            duration,
            spec.silence_padding_s,
            spec.sample_rate,
            &mut rng,
        );
        let id = format!("utt-{i:05}");
        let wav_path = audio_dir.join(format!("{id}.wav"));
        write_wav_16bit(&wav_path, &AudioClip::new(samples, spec.sample_rate, &id))?;

        let transcript = if metadata_informative {
            let pool = if kid {
                &spec.kid_templates
            } else {
                &spec.adult_templates
            };
            pool[rng.gen_range(0..pool.len())].clone()
        } else {
            // Neutral phrasing shared by both classes.
            const NEUTRAL: [&str; 4] = ["watch tv", "play something", "next channel", "turn it up"];
            NEUTRAL[rng.gen_range(0..NEUTRAL.len())].to_string()
        };

        let device = if metadata_informative {
            // Kids overwhelmingly use kid-household devices.
            let prefer_kid = if kid {
                rng.gen::<f64>() < 0.9
            } else {
                rng.gen::<f64>() < 0.1
            };
            devices
                .iter()
                .filter(|d| d.kid_household == prefer_kid)
                .nth(rng.gen_range(0..devices.len() / 2))
                .unwrap_or(&devices[0])
        } else {
            &devices[rng.gen_range(0..devices.len())]
        };

        // Kids speak during waking hours; adults at any hour.
        let hour = if kid {
            rng.gen_range(7..21u32)
        } else {
            rng.gen_range(0..24u32)
        };
        let day = base_day + rng.gen_range(0..28u32);
        let tz: Tz = device.timezone.parse().expect("generator zones are valid");
        let local = tz
            .with_ymd_and_hms(2024, 6, day, hour, rng.gen_range(0..60u32), 0)
            .single()
            .expect("June has no DST gaps in these zones");

        records.push(UtteranceRecord {
            id,
            audio_path: wav_path.to_string_lossy().into_owned(),
            transcript,
            device_id: device.id.clone(),
            timestamp_utc: local.with_timezone(&chrono::Utc),
            timezone: device.timezone.clone(),
            label: Some(label),
            gender: Some(gender),
            requested_content_kind: Some(if kid {
                ContentKind::KidsShow
            } else {
                ContentKind::Other
            }),
            partition: None,
        });
        sampled_f0.push(f0);
    }

    // Usage history per device over the same month.
    let mut events = Vec::with_capacity(devices.len() * spec.usage_events_per_device);
    for (d, device) in devices.iter().enumerate() {
        let mut rng = substream(spec.seed, "usage", d as u64);
        let tz: Tz = device.timezone.parse().expect("valid zone");
        for _ in 0..spec.usage_events_per_device {
            let hour = rng.gen_range(6..23u32);
            let day = base_day + rng.gen_range(0..28u32);
            let local = tz
                .with_ymd_and_hms(2024, 6, day, hour, rng.gen_range(0..60u32), 0)
                .single()
                .expect("no DST gap");
            let kid_show = rng.gen::<f64>() < (device.kid_show_prob)(hour);
            events.push(UsageEvent {
                device_id: device.id.clone(),
                timestamp_utc: local.with_timezone(&chrono::Utc),
                timezone: device.timezone.clone(),
                content_kind: if kid_show {
                    ContentKind::KidsShow
                } else {
                    ContentKind::Other
                },
                partition: None,
            });
        }
    }

    let manifest_path = out_dir.join("manifest.jsonl");
    write_manifest(&manifest_path, &records)?;
    let usage_log_path = out_dir.join("usage.jsonl");
    write_usage_log(&usage_log_path, &events)?;

    Ok(GeneratedCorpus {
        manifest_path,
        usage_log_path,
        audio_dir,
        records,
        sampled_f0,
    })
}
