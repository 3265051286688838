//! Non-acoustic feature domains: transcripts, request times, and per-device
//! usage history.

mod time;
mod usage;
mod vocab;

pub use time::{time_features, TimeFeatures, TIME_FEATURE_DIM};
pub use usage::{
    build_usage_profiles, ratio_features, read_profiles, read_usage_log, write_profiles,
    write_usage_log, UsageEvent, UsageProfile, RATIO_FEATURE_DIM,
};
pub use vocab::{build_vocabulary, bow_vector, Vocabulary};

use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ContextError {
    #[error("unknown timezone `{0}`")]
    UnknownTimezone(String),
    #[error("no tokens in training transcripts")]
    EmptyCorpus,
    #[error("refusing to build {what} from records partitioned as test")]
    TestLeakage { what: &'static str },
    #[error("manifest line {line}: {source}")]
    ManifestLine {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Target class. Adults fold MALE and FEMALE together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "ADULT")]
    Adult,
    #[serde(rename = "KID")]
    Kid,
}

impl Label {
    /// Class index used across training: ADULT = 0, KID = 1.
    pub fn class_index(self) -> usize {
        match self {
            Label::Adult => 0,
            Label::Kid => 1,
        }
    }

    pub fn from_class_index(i: usize) -> Self {
        if i == 0 {
            Label::Adult
        } else {
            Label::Kid
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Adult => "ADULT",
            Label::Kid => "KID",
        }
    }
}

/// Annotator gender tag. Retained only for the gender confusion breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "MALE")]
    Male,
    #[serde(rename = "FEMALE")]
    Female,
    #[serde(rename = "KID")]
    Kid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContentKind {
    KidsShow,
    Other,
}

/// Train/test partition tag applied by the splitter. Builders of shared
/// statistics (vocabulary, usage profiles) refuse test-tagged input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Train,
    Test,
}

/// One labeled utterance: audio reference, ASR transcript, device and
/// timing metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UtteranceRecord {
    pub id: String,
    pub audio_path: String,
    #[serde(default)]
    pub transcript: String,
    pub device_id: String,
    pub timestamp_utc: chrono::DateTime<chrono::Utc>,
    /// IANA zone name, e.g. "America/New_York".
    pub timezone: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<Gender>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested_content_kind: Option<ContentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
}

/// Read a JSON-lines manifest.
pub fn read_manifest(path: &Path) -> Result<Vec<UtteranceRecord>, ContextError> {
    let file = fs::File::open(path)?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: UtteranceRecord =
            serde_json::from_str(&line).map_err(|source| ContextError::ManifestLine {
                line: i + 1,
                source,
            })?;
        records.push(rec);
    }
    Ok(records)
}

pub fn write_manifest(path: &Path, records: &[UtteranceRecord]) -> Result<(), ContextError> {
    let mut out = fs::File::create(path)?;
    for rec in records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) fn test_record(id: &str, transcript: &str, label: Label) -> UtteranceRecord {
    use chrono::TimeZone;
    UtteranceRecord {
        id: id.to_string(),
        audio_path: format!("{id}.wav"),
        transcript: transcript.to_string(),
        device_id: "dev-1".to_string(),
        timestamp_utc: chrono::Utc.with_ymd_and_hms(2024, 6, 11, 16, 0, 0).unwrap(),
        timezone: "America/New_York".to_string(),
        label: Some(label),
        gender: None,
        requested_content_kind: None,
        partition: None,
    }
}
