//! Local-time features: weekday and hour one-hots plus the night flag.
//!
//! Timestamps are converted to the record's own IANA zone. The night window
//! is [23:00, 06:00) local, half-open, matching the hand rule that treats
//! late-night commands as adult.

use super::{ContextError, UtteranceRecord};
use chrono::{Datelike, Timelike};
use chrono_tz::Tz;

pub const TIME_FEATURE_DIM: usize = 7 + 24 + 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeFeatures {
    /// Monday = 0 ... Sunday = 6.
    pub weekday: usize,
    pub hour: usize,
    pub is_night: bool,
}

impl TimeFeatures {
    /// Flat layout: weekday one-hot (7), hour one-hot (24), night flag (1).
    pub fn to_vector(self) -> Vec<f64> {
        let mut v = vec![0.0; TIME_FEATURE_DIM];
        v[self.weekday] = 1.0;
        v[7 + self.hour] = 1.0;
        v[31] = if self.is_night { 1.0 } else { 0.0 };
        v
    }
}

pub(crate) fn resolve_zone(name: &str) -> Result<Tz, ContextError> {
    name.parse::<Tz>()
        .map_err(|_| ContextError::UnknownTimezone(name.to_string()))
}

pub(crate) fn is_night_hour(hour: usize) -> bool {
    hour >= 23 || hour < 6
}

/// Weekday/hour one-hots and the night flag in the record's local zone.
pub fn time_features(record: &UtteranceRecord) -> Result<TimeFeatures, ContextError> {
    let tz = resolve_zone(&record.timezone)?;
    let local = record.timestamp_utc.with_timezone(&tz);
    let weekday = local.weekday().num_days_from_monday() as usize;
    let hour = local.hour() as usize;
    Ok(TimeFeatures {
        weekday,
        hour,
        is_night: is_night_hour(hour),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{test_record, Label};
    use chrono::TimeZone;

    fn at_local(y: i32, mo: u32, d: u32, h: u32, mi: u32, zone: &str) -> UtteranceRecord {
        let tz: Tz = zone.parse().unwrap();
        let local = tz.with_ymd_and_hms(y, mo, d, h, mi, 0).unwrap();
        let mut rec = test_record("t", "", Label::Adult);
        rec.timestamp_utc = local.with_timezone(&chrono::Utc);
        rec.timezone = zone.to_string();
        rec
    }

    #[test]
    fn tuesday_half_past_eleven_pm_is_night() {
        // 2024-06-11 is a Tuesday.
        let rec = at_local(2024, 6, 11, 23, 30, "America/New_York");
        let tf = time_features(&rec).unwrap();
        assert_eq!(tf.weekday, 1);
        assert_eq!(tf.hour, 23);
        assert!(tf.is_night);
        let v = tf.to_vector();
        assert_eq!(v.len(), TIME_FEATURE_DIM);
        assert_eq!(v[1], 1.0);
        assert_eq!(v[7 + 23], 1.0);
        assert_eq!(v[31], 1.0);
    }

    #[test]
    fn saturday_noon_is_not_night() {
        // 2024-06-15 is a Saturday.
        let tf = time_features(&at_local(2024, 6, 15, 12, 0, "America/New_York")).unwrap();
        assert_eq!(tf.weekday, 5);
        assert_eq!(tf.hour, 12);
        assert!(!tf.is_night);
    }

    #[test]
    fn six_am_exactly_is_outside_the_half_open_window() {
        let tf = time_features(&at_local(2024, 6, 12, 6, 0, "America/New_York")).unwrap();
        assert!(!tf.is_night);
        let tf = time_features(&at_local(2024, 6, 12, 5, 59, "America/New_York")).unwrap();
        assert!(tf.is_night);
    }

    #[test]
    fn unknown_timezone_is_an_error() {
        let mut rec = test_record("t", "", Label::Adult);
        rec.timezone = "Mars/Olympus_Mons".to_string();
        assert!(matches!(
            time_features(&rec),
            Err(ContextError::UnknownTimezone(_))
        ));
    }

    #[test]
    fn conversion_respects_the_zone() {
        // 03:30 UTC on Wednesday = 23:30 Tuesday in New York (EDT).
        let mut rec = test_record("t", "", Label::Adult);
        rec.timestamp_utc = chrono::Utc.with_ymd_and_hms(2024, 6, 12, 3, 30, 0).unwrap();
        rec.timezone = "America/New_York".to_string();
        let tf = time_features(&rec).unwrap();
        assert_eq!((tf.weekday, tf.hour), (1, 23));

        rec.timezone = "UTC".to_string();
        let tf = time_features(&rec).unwrap();
        assert_eq!((tf.weekday, tf.hour), (2, 3));
    }

    #[test]
    fn night_flag_matches_brute_force_over_all_hours() {
        for h in 0..24 {
            let rec = at_local(2024, 6, 10, h, 0, "America/Chicago");
            let tf = time_features(&rec).unwrap();
            let brute = (23..24).contains(&h) || (0..6).contains(&h);
            assert_eq!(tf.is_night, brute, "hour {h}");
            assert_eq!(tf.hour, h as usize);
        }
    }

    #[test]
    fn one_hot_constraints_hold() {
        for h in [0, 5, 6, 12, 22, 23] {
            let v = time_features(&at_local(2024, 6, 13, h, 15, "Europe/Berlin"))
                .unwrap()
                .to_vector();
            assert_eq!(v[..7].iter().sum::<f64>(), 1.0);
            assert_eq!(v[7..31].iter().sum::<f64>(), 1.0);
        }
    }
}
