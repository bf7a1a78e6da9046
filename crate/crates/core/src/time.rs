//! Microsecond-resolution instants.
//!
//! CASAS logs carry wall-clock times without a zone; they are stored as-is on
//! a UTC axis and only shifted by a fixed offset when rendered into prompts.

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const MICROS_PER_SECOND: i64 = 1_000_000;
pub const MICROS_PER_DAY: i64 = 86_400 * MICROS_PER_SECOND;

/// Microseconds since the Unix epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(pub i64);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unparseable timestamp `{0}`")]
pub struct TimestampParseError(pub String);

const FORMATS: &[&str] = &[
    "%Y-%m-%d %H:%M:%S%.f",
    "%Y-%m-%dT%H:%M:%S%.f",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%dT%H:%M:%S",
];

impl Timestamp {
    pub fn from_micros(micros: i64) -> Self {
        Timestamp(micros)
    }

    pub fn from_secs(secs: i64) -> Self {
        Timestamp(secs * MICROS_PER_SECOND)
    }

    pub fn micros(self) -> i64 {
        self.0
    }

    /// Parses `date` and `time` tokens as they appear in a CASAS line.
    pub fn parse_parts(date: &str, time: &str) -> Result<Self, TimestampParseError> {
        Self::parse(&format!("{date} {time}"))
    }

    pub fn parse(text: &str) -> Result<Self, TimestampParseError> {
        let trimmed = text.trim().trim_end_matches('Z');
        for fmt in FORMATS {
            if let Ok(naive) = NaiveDateTime::parse_from_str(trimmed, fmt) {
                return Ok(Self::from_naive(naive));
            }
        }
        Err(TimestampParseError(text.to_string()))
    }

    pub fn from_naive(naive: NaiveDateTime) -> Self {
        Timestamp(naive.and_utc().timestamp_micros())
    }

    pub fn to_naive(self) -> NaiveDateTime {
        DateTime::<Utc>::from_timestamp_micros(self.0)
            .expect("timestamp within chrono range")
            .naive_utc()
    }

    pub fn date(self) -> NaiveDate {
        self.to_naive().date()
    }

    pub fn start_of_day(date: NaiveDate) -> Self {
        Self::from_naive(date.and_hms_opt(0, 0, 0).expect("midnight exists"))
    }

    /// Midnight at or before this instant.
    pub fn floor_day(self) -> Self {
        Timestamp(self.0.div_euclid(MICROS_PER_DAY) * MICROS_PER_DAY)
    }

    /// Midnight strictly after this instant.
    pub fn next_midnight(self) -> Self {
        Timestamp(self.floor_day().0 + MICROS_PER_DAY)
    }

    pub fn plus_micros(self, micros: i64) -> Self {
        Timestamp(self.0 + micros)
    }

    pub fn seconds_since(self, earlier: Timestamp) -> f64 {
        (self.0 - earlier.0) as f64 / MICROS_PER_SECOND as f64
    }

    /// Second-precision ISO-8601 rendering shifted by `offset`.
    pub fn format_local_seconds(self, offset: FixedOffset) -> String {
        let utc = DateTime::<Utc>::from_timestamp_micros(self.0).expect("timestamp within chrono range");
        utc.with_timezone(&offset).format("%Y-%m-%dT%H:%M:%S").to_string()
    }

    /// `YYYY-MM-DD HH:MM:SS.ffffff`, the CASAS layout.
    pub fn format_casas(self) -> String {
        self.to_naive().format("%Y-%m-%d %H:%M:%S%.6f").to_string()
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_naive().format("%Y-%m-%dT%H:%M:%S%.6f"))
    }
}

impl FromStr for Timestamp {
    type Err = TimestampParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl Serialize for Timestamp {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Timestamp {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Timestamp::parse(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_and_without_fraction() {
        let a = Timestamp::parse_parts("2010-11-04", "05:40:51.303739").unwrap();
        let b = Timestamp::parse_parts("2010-11-04", "05:40:51").unwrap();
        assert_eq!(a.micros() - b.micros(), 303_739);
        assert_eq!(a.format_casas(), "2010-11-04 05:40:51.303739");
        assert_eq!(a.to_string(), "2010-11-04T05:40:51.303739");
        assert_eq!(a.to_string().parse::<Timestamp>().unwrap(), a);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Timestamp::parse_parts("2010-13-04", "05:40:51").is_err());
        assert!(Timestamp::parse("yesterday").is_err());
    }

    #[test]
    fn day_boundaries() {
        let t = Timestamp::parse("2010-11-04 05:40:51").unwrap();
        assert_eq!(t.floor_day(), Timestamp::parse("2010-11-04 00:00:00").unwrap());
        assert_eq!(t.next_midnight(), Timestamp::parse("2010-11-05 00:00:00").unwrap());
    }

    #[test]
    fn local_rendering_applies_offset() {
        let t = Timestamp::parse("2010-11-04 05:40:51.9").unwrap();
        let utc = FixedOffset::east_opt(0).unwrap();
        let plus2 = FixedOffset::east_opt(7200).unwrap();
        assert_eq!(t.format_local_seconds(utc), "2010-11-04T05:40:51");
        assert_eq!(t.format_local_seconds(plus2), "2010-11-04T07:40:51");
    }
}
