//! Simulation clock: minute-resolution timestamps anchored at a fixed epoch.

use std::fmt;
use std::ops::{Add, Sub};

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike, Weekday};

use crate::error::{Error, Result};

pub const MINUTES_PER_HOUR: i64 = 60;
pub const MINUTES_PER_DAY: i64 = 1440;

/// Minutes since 2000-01-01T00:00 (naive local time, no DST).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Timestamp(i64);

fn epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2000, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid epoch")
}

impl Timestamp {
    pub const EPOCH: Timestamp = Timestamp(0);

    /// Panics on negative input; timestamps before the epoch do not exist.
    pub fn from_minutes(minutes: i64) -> Self {
        assert!(minutes >= 0, "timestamp before epoch: {minutes}");
        Timestamp(minutes)
    }

    pub fn minutes(self) -> i64 {
        self.0
    }

    pub fn from_datetime(dt: NaiveDateTime) -> Result<Self> {
        if dt.second() != 0 || dt.nanosecond() != 0 {
            return Err(Error::invalid(format!(
                "timestamp {dt} is not minute-aligned"
            )));
        }
        let minutes = (dt - epoch()).num_minutes();
        if minutes < 0 {
            return Err(Error::invalid(format!(
                "timestamp {dt} precedes 2000-01-01"
            )));
        }
        Ok(Timestamp(minutes))
    }

    pub fn from_ymd_hm(year: i32, month: u32, day: u32, hour: u32, minute: u32) -> Result<Self> {
        let dt = NaiveDate::from_ymd_opt(year, month, day)
            .and_then(|d| d.and_hms_opt(hour, minute, 0))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "invalid date {year}-{month:02}-{day:02} {hour:02}:{minute:02}"
                ))
            })?;
        Self::from_datetime(dt)
    }

    /// Midnight starting January 1 of `year`.
    pub fn start_of_year(year: i32) -> Result<Self> {
        Self::from_ymd_hm(year, 1, 1, 0, 0)
    }

    pub fn to_datetime(self) -> NaiveDateTime {
        epoch() + Duration::minutes(self.0)
    }

    pub fn date(self) -> NaiveDate {
        self.to_datetime().date()
    }

    pub fn year(self) -> i32 {
        self.to_datetime().year()
    }

    pub fn month(self) -> u32 {
        self.to_datetime().month()
    }

    pub fn day(self) -> u32 {
        self.to_datetime().day()
    }

    pub fn weekday(self) -> Weekday {
        self.to_datetime().weekday()
    }

    pub fn hour_of_day(self) -> u32 {
        ((self.0 % MINUTES_PER_DAY) / MINUTES_PER_HOUR) as u32
    }

    pub fn minute_of_hour(self) -> u32 {
        (self.0 % MINUTES_PER_HOUR) as u32
    }

    pub fn minute_of_day(self) -> i64 {
        self.0 % MINUTES_PER_DAY
    }

    /// Start of the clock hour containing this instant.
    pub fn floor_hour(self) -> Self {
        Timestamp(self.0 - self.0 % MINUTES_PER_HOUR)
    }

    pub fn floor_day(self) -> Self {
        Timestamp(self.0 - self.0 % MINUTES_PER_DAY)
    }

    /// Parse an ISO-8601 local timestamp (`YYYY-MM-DDTHH:MM[:SS]`, a space separator, or a bare date).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim().trim_end_matches('Z');
        const FORMATS: [&str; 4] = [
            "%Y-%m-%dT%H:%M:%S",
            "%Y-%m-%dT%H:%M",
            "%Y-%m-%d %H:%M:%S",
            "%Y-%m-%d %H:%M",
        ];
        for fmt in FORMATS {
            if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
                return Self::from_datetime(dt);
            }
        }
        if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
            return Self::from_datetime(d.and_hms_opt(0, 0, 0).expect("midnight"));
        }
        Err(Error::invalid(format!("cannot parse timestamp {s:?}")))
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_datetime().format("%Y-%m-%dT%H:%M"))
    }
}

impl Add<i64> for Timestamp {
    type Output = Timestamp;
    fn add(self, minutes: i64) -> Timestamp {
        Timestamp::from_minutes(self.0 + minutes)
    }
}

impl Sub for Timestamp {
    type Output = i64;
    fn sub(self, other: Timestamp) -> i64 {
        self.0 - other.0
    }
}

/// Simulated interval `[start, end)` stepped at `tick` minutes, with dispatch decisions every
/// `decision_interval` minutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulationSpan {
    pub start: Timestamp,
    pub end: Timestamp,
    pub tick: i64,
    pub decision_interval: i64,
}

impl SimulationSpan {
    pub fn new(
        start: Timestamp,
        end: Timestamp,
        tick: i64,
        decision_interval: i64,
    ) -> Result<Self> {
        if start >= end {
            return Err(Error::invalid(format!(
                "span start {start} is not before end {end}"
            )));
        }
        if tick <= 0 || MINUTES_PER_HOUR % tick != 0 {
            return Err(Error::invalid(format!(
                "tick {tick} min must be positive and divide 60"
            )));
        }
        if decision_interval <= 0 || decision_interval % tick != 0 {
            return Err(Error::invalid(format!(
                "decision interval {decision_interval} min must be a positive multiple of the tick ({tick} min)"
            )));
        }
        if (end - start) % tick != 0 {
            return Err(Error::invalid("span length is not a whole number of ticks"));
        }
        Ok(SimulationSpan {
            start,
            end,
            tick,
            decision_interval,
        })
    }

    /// One-minute ticks.
    pub fn minutes(start: Timestamp, end: Timestamp, decision_interval: i64) -> Result<Self> {
        Self::new(start, end, 1, decision_interval)
    }

    pub fn len_minutes(&self) -> i64 {
        self.end - self.start
    }

    pub fn tick_count(&self) -> usize {
        (self.len_minutes() / self.tick) as usize
    }

    pub fn ticks(&self) -> impl Iterator<Item = Timestamp> + '_ {
        (0..self.tick_count() as i64).map(move |i| self.start + i * self.tick)
    }

    pub fn is_decision_boundary(&self, t: Timestamp) -> bool {
        (t - self.start) % self.decision_interval == 0
    }

    pub fn contains(&self, t: Timestamp) -> bool {
        self.start <= t && t < self.end
    }

    /// Calendar years touched by the span, in order.
    pub fn years(&self) -> Vec<i32> {
        let last = Timestamp::from_minutes(self.end.minutes() - 1).year();
        (self.start.year()..=last).collect()
    }

    pub fn with_decision_interval(self, decision_interval: i64) -> Result<Self> {
        Self::new(self.start, self.end, self.tick, decision_interval)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calendar_fields() {
        let t = Timestamp::from_ymd_hm(2032, 1, 29, 17, 5).unwrap();
        assert_eq!(t.year(), 2032);
        assert_eq!(t.month(), 1);
        assert_eq!(t.day(), 29);
        assert_eq!(t.hour_of_day(), 17);
        assert_eq!(t.minute_of_hour(), 5);
        assert_eq!(t.weekday(), Weekday::Thu);
        assert_eq!(t.to_string(), "2032-01-29T17:05");
    }

    #[test]
    fn year_lengths() {
        for year in 2020..2040 {
            let len = Timestamp::start_of_year(year + 1).unwrap()
                - Timestamp::start_of_year(year).unwrap();
            let leap = NaiveDate::from_ymd_opt(year, 2, 29).is_some();
            assert_eq!(len, if leap { 527_040 } else { 525_600 }, "{year}");
        }
    }

    #[test]
    fn parse_formats() {
        let a = Timestamp::parse("2039-03-01T06:30").unwrap();
        assert_eq!(Timestamp::parse("2039-03-01 06:30:00").unwrap(), a);
        assert_eq!(Timestamp::parse("2039-03-01T06:30:00Z").unwrap(), a);
        assert_eq!(Timestamp::parse("2039-03-01").unwrap(), a.floor_day());
        assert!(Timestamp::parse("1999-12-31T23:59").is_err());
        assert!(Timestamp::parse("2039-03-01T06:30:15").is_err());
        assert!(Timestamp::parse("yesterday").is_err());
    }

    #[test]
    fn span_validation() {
        let a = Timestamp::start_of_year(2039).unwrap();
        let b = a + MINUTES_PER_DAY;
        assert!(SimulationSpan::minutes(a, b, 15).is_ok());
        assert!(SimulationSpan::minutes(b, a, 15).is_err());
        assert!(SimulationSpan::new(a, b, 7, 14).is_err());
        assert!(SimulationSpan::new(a, b, 5, 12).is_err());
        assert!(SimulationSpan::minutes(a, b, 0).is_err());
        let s = SimulationSpan::minutes(a, b, 15).unwrap();
        assert!(s.is_decision_boundary(a + 30));
        assert!(!s.is_decision_boundary(a + 31));
        assert_eq!(s.tick_count(), 1440);
    }

    #[test]
    fn span_years() {
        let s = SimulationSpan::minutes(
            Timestamp::start_of_year(2036).unwrap(),
            Timestamp::start_of_year(2040).unwrap(),
            15,
        )
        .unwrap();
        assert_eq!(s.years(), vec![2036, 2037, 2038, 2039]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn calendar_round_trip(m in 0i64..60_000_000) {
                let t = Timestamp::from_minutes(m);
                let back = Timestamp::from_datetime(t.to_datetime()).unwrap();
                prop_assert_eq!(back, t);
                prop_assert_eq!(Timestamp::parse(&t.to_string()).unwrap(), t);
                let d = t.to_datetime();
                prop_assert_eq!(t.hour_of_day(), d.hour());
                prop_assert_eq!(t.minute_of_hour(), d.minute());
            }
        }
    }
}
