//! Per-device show-type usage profiles and the ratio feature vector.
//!
//! A profile buckets one device's requests by local hour, local weekday, and
//! overall, tracking how many targeted kids content. Empty buckets are
//! distinct from a zero ratio and impute to the uninformative midpoint 0.5
//! at feature time; night-time requests zero the whole ratio vector.

use super::time::{is_night_hour, resolve_zone};
use super::{ContentKind, ContextError, Partition, UtteranceRecord};
use chrono::{Datelike, Timelike};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub const RATIO_FEATURE_DIM: usize = 3;

/// One row of the usage log: a content request from a device.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UsageEvent {
    pub device_id: String,
    pub timestamp_utc: chrono::DateTime<chrono::Utc>,
    pub timezone: String,
    pub content_kind: ContentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
}

/// Kids-content request counts for one device, bucketed by local time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageProfile {
    pub device_id: String,
    pub kid_count_by_hour: [u64; 24],
    pub request_count_by_hour: [u64; 24],
    pub kid_count_by_weekday: [u64; 7],
    pub request_count_by_weekday: [u64; 7],
    pub kid_count_overall: u64,
    pub request_count_overall: u64,
}

impl UsageProfile {
    fn ratio(kid: u64, total: u64) -> Option<f64> {
        if total == 0 {
            None
        } else {
            Some(kid as f64 / total as f64)
        }
    }

    /// Kids-content ratio for a local hour; `None` when the bucket is empty.
    pub fn kid_ratio_by_hour(&self, hour: usize) -> Option<f64> {
        Self::ratio(self.kid_count_by_hour[hour], self.request_count_by_hour[hour])
    }

    pub fn kid_ratio_by_weekday(&self, weekday: usize) -> Option<f64> {
        Self::ratio(
            self.kid_count_by_weekday[weekday],
            self.request_count_by_weekday[weekday],
        )
    }

    pub fn kid_ratio_overall(&self) -> Option<f64> {
        Self::ratio(self.kid_count_overall, self.request_count_overall)
    }
}

/// Aggregate a usage log into per-device profiles. Refuses events tagged as
/// test; profiles must describe the training period only.
pub fn build_usage_profiles(
    events: &[UsageEvent],
) -> Result<BTreeMap<String, UsageProfile>, ContextError> {
    if events.iter().any(|e| e.partition == Some(Partition::Test)) {
        return Err(ContextError::TestLeakage {
            what: "usage profiles",
        });
    }
    let mut profiles: BTreeMap<String, UsageProfile> = BTreeMap::new();
    for event in events {
        let tz = resolve_zone(&event.timezone)?;
        let local = event.timestamp_utc.with_timezone(&tz);
        let hour = local.hour() as usize;
        let weekday = local.weekday().num_days_from_monday() as usize;
        let is_kid = event.content_kind == ContentKind::KidsShow;

        let p = profiles.entry(event.device_id.clone()).or_insert_with(|| {
            UsageProfile {
                device_id: event.device_id.clone(),
                ..UsageProfile::default()
            }
        });
        p.request_count_by_hour[hour] += 1;
        p.request_count_by_weekday[weekday] += 1;
        p.request_count_overall += 1;
        if is_kid {
            p.kid_count_by_hour[hour] += 1;
            p.kid_count_by_weekday[weekday] += 1;
            p.kid_count_overall += 1;
        }
    }
    Ok(profiles)
}

/// `[hour ratio, weekday ratio, overall ratio]` for one record: empty or
/// unknown buckets impute to 0.5, and night-time records zero the vector.
pub fn ratio_features(
    record: &UtteranceRecord,
    profiles: &BTreeMap<String, UsageProfile>,
) -> Result<[f64; RATIO_FEATURE_DIM], ContextError> {
    let tz = resolve_zone(&record.timezone)?;
    let local = record.timestamp_utc.with_timezone(&tz);
    let hour = local.hour() as usize;
    if is_night_hour(hour) {
        return Ok([0.0; RATIO_FEATURE_DIM]);
    }
    let weekday = local.weekday().num_days_from_monday() as usize;
    let Some(p) = profiles.get(&record.device_id) else {
        return Ok([0.5; RATIO_FEATURE_DIM]);
    };
    Ok([
        p.kid_ratio_by_hour(hour).unwrap_or(0.5),
        p.kid_ratio_by_weekday(weekday).unwrap_or(0.5),
        p.kid_ratio_overall().unwrap_or(0.5),
    ])
}

pub fn read_usage_log(path: &Path) -> Result<Vec<UsageEvent>, ContextError> {
    let file = fs::File::open(path)?;
    let mut events = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: UsageEvent =
            serde_json::from_str(&line).map_err(|source| ContextError::ManifestLine {
                line: i + 1,
                source,
            })?;
        events.push(event);
    }
    Ok(events)
}

pub fn write_usage_log(path: &Path, events: &[UsageEvent]) -> Result<(), ContextError> {
    let mut out = fs::File::create(path)?;
    for event in events {
        serde_json::to_writer(&mut out, event)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_profiles(
    path: &Path,
    profiles: &BTreeMap<String, UsageProfile>,
) -> Result<(), ContextError> {
    let json = serde_json::to_string_pretty(profiles)?;
    fs::write(path, json)?;
    Ok(())
}

pub fn read_profiles(path: &Path) -> Result<BTreeMap<String, UsageProfile>, ContextError> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
