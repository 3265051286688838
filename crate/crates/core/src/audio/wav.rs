//! RIFF/WAVE reading and writing.
//!
//! Reads PCM integer (8/16/24-bit) and IEEE float (32-bit) files, mono or
//! multichannel; multichannel input is averaged down to mono. Writes 16-bit
//! PCM mono, which is all the corpus generator and debug dumps need.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{AudioClip, AudioError};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_IEEE_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xfffe;

fn u16_at(b: &[u8], off: usize) -> Result<u16, AudioError> {
    b.get(off..off + 2)
        .map(|s| u16::from_le_bytes([s[0], s[1]]))
        .ok_or_else(|| AudioError::CorruptFile("truncated header".into()))
}

fn u32_at(b: &[u8], off: usize) -> Result<u32, AudioError> {
    b.get(off..off + 4)
        .map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
        .ok_or_else(|| AudioError::CorruptFile("truncated header".into()))
}

struct Format {
    code: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Load a WAV file as a mono clip with samples scaled to `[-1, 1]`.
///
/// The clip keeps the file's sample rate; resampling to the analysis rate is
/// the feature extractor's concern. The clip's `source_id` is the file stem.
pub fn load_wav(path: &Path) -> Result<AudioClip, AudioError> {
    let bytes = fs::read(path)?;
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(AudioError::CorruptFile("missing RIFF/WAVE header".into()));
    }

    let mut fmt: Option<Format> = None;
    let mut data: Option<&[u8]> = None;
    let mut off = 12usize;
    while off + 8 <= bytes.len() {
        let id = &bytes[off..off + 4];
        let size = u32_at(&bytes, off + 4)? as usize;
        let body_start = off + 8;
        if body_start + size > bytes.len() {
            return Err(AudioError::CorruptFile(format!(
                "chunk {} overruns file",
                String::from_utf8_lossy(id)
            )));
        }
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(AudioError::CorruptFile("fmt chunk too small".into()));
                }
                let mut code = u16_at(&bytes, body_start)?;
                if code == FORMAT_EXTENSIBLE {
                    // Sub-format GUID starts with the format code.
                    if size < 40 {
                        return Err(AudioError::CorruptFile("extensible fmt chunk too small".into()));
                    }
                    code = u16_at(&bytes, body_start + 24)?;
                }
                fmt = Some(Format {
                    code,
                    channels: u16_at(&bytes, body_start + 2)?,
                    sample_rate: u32_at(&bytes, body_start + 4)?,
                    bits_per_sample: u16_at(&bytes, body_start + 14)?,
                });
            }
            b"data" => data = Some(&bytes[body_start..body_start + size]),
            _ => {}
        }
        // Chunks are word-aligned.
        off = body_start + size + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| AudioError::CorruptFile("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| AudioError::CorruptFile("missing data chunk".into()))?;
    if fmt.channels == 0 || fmt.sample_rate == 0 {
        return Err(AudioError::CorruptFile("zero channels or sample rate".into()));
    }

    let bytes_per_sample = match (fmt.code, fmt.bits_per_sample) {
        (FORMAT_PCM, 8) => 1,
        (FORMAT_PCM, 16) => 2,
        (FORMAT_PCM, 24) => 3,
        (FORMAT_IEEE_FLOAT, 32) => 4,
        (FORMAT_PCM | FORMAT_IEEE_FLOAT, bits) => {
            return Err(AudioError::UnsupportedFormat(format!(
                "{} bits per sample",
                bits
            )))
        }
        (code, _) => {
            return Err(AudioError::UnsupportedFormat(format!(
                "format code 0x{code:04x} (not PCM or IEEE float)"
            )))
        }
    };

    let frame_bytes = bytes_per_sample * fmt.channels as usize;
    let n_frames = data.len() / frame_bytes;
    if n_frames == 0 {
        return Err(AudioError::EmptyAudio);
    }

    let channels = fmt.channels as usize;
    let mut samples = Vec::with_capacity(n_frames);
    for frame in 0..n_frames {
        let mut acc = 0.0f64;
        for ch in 0..channels {
            let p = frame * frame_bytes + ch * bytes_per_sample;
            let v = match (fmt.code, fmt.bits_per_sample) {
                (FORMAT_PCM, 8) => (f64::from(data[p]) - 128.0) / 128.0,
                (FORMAT_PCM, 16) => {
                    f64::from(i16::from_le_bytes([data[p], data[p + 1]])) / 32768.0
                }
                (FORMAT_PCM, 24) => {
                    let raw = i32::from_le_bytes([0, data[p], data[p + 1], data[p + 2]]) >> 8;
                    f64::from(raw) / 8_388_608.0
                }
                (FORMAT_IEEE_FLOAT, 32) => f64::from(f32::from_le_bytes([
                    data[p],
                    data[p + 1],
                    data[p + 2],
                    data[p + 3],
                ])),
                _ => unreachable!("format validated above"),
            };
            acc += v;
        }
        samples.push(acc / channels as f64);
    }

    let source_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(AudioClip::new(samples, fmt.sample_rate, source_id))
}

/// Write a clip as 16-bit PCM mono WAV.
pub fn write_wav_16bit(path: &Path, clip: &AudioClip) -> Result<(), AudioError> {
    let n = clip.len();
    let data_size = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_size).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&clip.sample_rate().to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate() * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_size.to_le_bytes());
    for &s in clip.samples() {
        let q = (s * 32767.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wav_bytes(channels: u16, sample_rate: u32, bits: u16, format: u16, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&format.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&sample_rate.to_le_bytes());
        let block = channels * bits / 8;
        out.extend_from_slice(&(sample_rate * u32::from(block)).to_le_bytes());
        out.extend_from_slice(&block.to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    fn write_temp(bytes: &[u8]) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        fs::write(f.path(), bytes).unwrap();
        f
    }

    #[test]
    fn sixteen_bit_mono_duration() {
        let data: Vec<u8> = (0..19_200u32)
            .flat_map(|_| 1000i16.to_le_bytes())
            .collect();
        let f = write_temp(&wav_bytes(1, 16_000, 16, FORMAT_PCM, &data));
        let clip = load_wav(f.path()).unwrap();
        assert_eq!(clip.len(), 19_200);
        assert!((clip.duration_seconds() - 1.2).abs() < 1e-12);
        assert!((clip.samples()[0] - 1000.0 / 32768.0).abs() < 1e-12);
    }

    #[test]
    fn opposite_stereo_channels_cancel() {
        let mut data = Vec::new();
        for _ in 0..100 {
            data.extend_from_slice(&16384i16.to_le_bytes()); // L = +0.5
            data.extend_from_slice(&(-16384i16).to_le_bytes()); // R = -0.5
        }
        let f = write_temp(&wav_bytes(2, 16_000, 16, FORMAT_PCM, &data));
        let clip = load_wav(f.path()).unwrap();
        assert_eq!(clip.len(), 100);
        assert!(clip.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn empty_data_chunk_is_empty_audio() {
        let f = write_temp(&wav_bytes(1, 16_000, 16, FORMAT_PCM, &[]));
        assert!(matches!(load_wav(f.path()), Err(AudioError::EmptyAudio)));
    }

    #[test]
    fn non_pcm_codec_is_unsupported() {
        let f = write_temp(&wav_bytes(1, 8_000, 16, 0x0006 /* a-law */, &[0, 0]));
        assert!(matches!(
            load_wav(f.path()),
            Err(AudioError::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn truncated_header_is_corrupt() {
        let f = write_temp(b"RIFF\x10\x00\x00\x00WAV");
        assert!(matches!(load_wav(f.path()), Err(AudioError::CorruptFile(_))));
    }

    #[test]
    fn float32_round_trip_values() {
        let vals = [0.25f32, -0.5, 0.99, -1.0];
        let data: Vec<u8> = vals.iter().flat_map(|v| v.to_le_bytes()).collect();
        let f = write_temp(&wav_bytes(1, 48_000, 32, FORMAT_IEEE_FLOAT, &data));
        let clip = load_wav(f.path()).unwrap();
        for (got, want) in clip.samples().iter().zip(vals) {
            assert!((got - f64::from(want)).abs() < 1e-7);
        }
    }

    #[test]
    fn write_then_load_round_trips_within_quantization() {
        let clip = AudioClip::new(
            (0..1600)
                .map(|i| 0.4 * (2.0 * std::f64::consts::PI * 220.0 * i as f64 / 16_000.0).sin())
                .collect(),
            16_000,
            "tone",
        );
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tone.wav");
        write_wav_16bit(&p, &clip).unwrap();
        let back = load_wav(&p).unwrap();
        assert_eq!(back.len(), clip.len());
        assert_eq!(back.sample_rate(), 16_000);
        assert_eq!(back.source_id(), "tone");
        for (a, b) in back.samples().iter().zip(clip.samples()) {
            assert!((a - b).abs() < 1.0 / 32000.0);
        }
    }
}
