//! Transformer-level load accounting.

use crate::error::{Error, Result};
use crate::time::{Timestamp, MINUTES_PER_HOUR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transformer {
    pub capacity_kw: f64,
    /// Dispatch headroom; not part of the physical limit.
    pub buffer_kw: f64,
}

impl Transformer {
    pub fn new(capacity_kw: f64, buffer_kw: f64) -> Result<Self> {
        if !(capacity_kw.is_finite() && capacity_kw > 0.0) {
            return Err(Error::invalid(format!(
                "transformer capacity {capacity_kw} kW must be > 0"
            )));
        }
        if !(buffer_kw >= 0.0 && buffer_kw < capacity_kw) {
            return Err(Error::invalid(format!(
                "buffer {buffer_kw} kW must lie in [0, {capacity_kw})"
            )));
        }
        Ok(Transformer {
            capacity_kw,
            buffer_kw,
        })
    }

    pub fn with_buffer(self, buffer_kw: f64) -> Result<Self> {
        Self::new(self.capacity_kw, buffer_kw)
    }
}

/// Regularly sampled power series in kW.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSeries {
    pub start: Timestamp,
    pub resolution: i64,
    pub values: Vec<f64>,
}

impl LoadSeries {
    pub fn new(start: Timestamp, resolution: i64, values: Vec<f64>) -> Self {
        debug_assert!(resolution > 0);
        LoadSeries {
            start,
            resolution,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Exclusive end instant.
    pub fn end(&self) -> Timestamp {
        self.start + self.values.len() as i64 * self.resolution
    }

    pub fn time_at(&self, index: usize) -> Timestamp {
        self.start + index as i64 * self.resolution
    }

    /// Value of the sample covering `t`, if any.
    pub fn value_at(&self, t: Timestamp) -> Option<f64> {
        if t < self.start {
            return None;
        }
        self.values
            .get(((t - self.start) / self.resolution) as usize)
            .copied()
    }

    pub fn covers(&self, from: Timestamp, to: Timestamp) -> bool {
        self.start <= from && to <= self.end()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Timestamp, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.time_at(i), v))
    }

    /// Sub-series over `[from, to)`; both bounds are snapped down to sample boundaries.
    pub fn slice(&self, from: Timestamp, to: Timestamp) -> LoadSeries {
        let from = from.max(self.start);
        let to = to.min(self.end());
        if from >= to {
            return LoadSeries::new(from, self.resolution, Vec::new());
        }
        let a = ((from - self.start) / self.resolution) as usize;
        let b = ((to - self.start) / self.resolution) as usize;
        LoadSeries::new(self.time_at(a), self.resolution, self.values[a..b].to_vec())
    }

    /// Energy in kWh of the whole series.
    pub fn energy_kwh(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.resolution as f64 / 60.0
    }

    pub fn max(&self) -> Option<f64> {
        self.values.iter().copied().reduce(f64::max)
    }

    pub fn mean(&self) -> Option<f64> {
        if self.values.is_empty() {
            None
        } else {
            Some(self.values.iter().sum::<f64>() / self.values.len() as f64)
        }
    }
}

/// Maximal contiguous run of samples above transformer capacity; `duration` is in minutes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverloadEvent {
    pub start: Timestamp,
    pub duration: i64,
    pub peak_excess_kw: f64,
}

impl OverloadEvent {
    pub fn end(&self) -> Timestamp {
        self.start + self.duration
    }
}

/// Total load at the transformer: every household baseload plus every granted charging rate.
pub fn aggregate_load(baseload_kw: &[f64], charging_kw: &[f64]) -> f64 {
    baseload_kw.iter().sum::<f64>() + charging_kw.iter().sum::<f64>()
}

pub fn available_capacity(tr: &Transformer, baseload_total_kw: f64) -> f64 {
    (tr.capacity_kw - tr.buffer_kw - baseload_total_kw).max(0.0)
}

/// Load above capacity by less than this is floating-point noise from summing many rates, not
/// an overload.
pub const OVERLOAD_TOLERANCE_KW: f64 = 1e-6;

/// Overloads are measured against raw capacity; the buffer only shapes dispatch.
pub fn detect_overloads(series: &LoadSeries, tr: &Transformer) -> Vec<OverloadEvent> {
    let mut events = Vec::new();
    let mut current: Option<OverloadEvent> = None;
    for (t, load) in series.iter() {
        let excess = load - tr.capacity_kw;
        if excess > OVERLOAD_TOLERANCE_KW {
            match current.as_mut() {
                Some(ev) => {
                    ev.duration += series.resolution;
                    ev.peak_excess_kw = ev.peak_excess_kw.max(excess);
                }
                None => {
                    current = Some(OverloadEvent {
                        start: t,
                        duration: series.resolution,
                        peak_excess_kw: excess,
                    })
                }
            }
        } else if let Some(ev) = current.take() {
            events.push(ev);
        }
    }
    events.extend(current);
    events
}

fn hourly_fold(series: &LoadSeries, fold: impl Fn(&[f64]) -> f64) -> LoadSeries {
    assert!(
        series.resolution > 0 && MINUTES_PER_HOUR % series.resolution == 0,
        "resolution {} does not divide an hour",
        series.resolution
    );
    let per_hour = (MINUTES_PER_HOUR / series.resolution) as usize;
    // Skip a leading partial hour so that every bucket is a clock hour.
    let first_hour = if series.start.minute_of_hour() == 0 {
        series.start
    } else {
        series.start.floor_hour() + MINUTES_PER_HOUR
    };
    let skip = ((first_hour - series.start) / series.resolution) as usize;
    let values = series
        .values
        .get(skip..)
        .unwrap_or(&[])
        .chunks_exact(per_hour)
        .map(fold)
        .collect();
    LoadSeries::new(first_hour, MINUTES_PER_HOUR, values)
}

/// One value per complete clock hour: the maximum of the member samples.
pub fn hourly_max(series: &LoadSeries) -> LoadSeries {
    hourly_fold(series, |c| {
        c.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    })
}

pub fn hourly_mean(series: &LoadSeries) -> LoadSeries {
    hourly_fold(series, |c| c.iter().sum::<f64>() / c.len() as f64)
}

/// Hours (clock hours) that contain at least one overloaded minute.
pub fn overloaded_hours(events: &[OverloadEvent]) -> Vec<Timestamp> {
    let mut hours: Vec<Timestamp> = Vec::new();
    for ev in events {
        let mut h = ev.start.floor_hour();
        while h < ev.end() {
            if hours.last() != Some(&h) {
                hours.push(h);
            }
            h = h + MINUTES_PER_HOUR;
        }
    }
    hours
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t0() -> Timestamp {
        Timestamp::from_ymd_hm(2032, 1, 29, 0, 0).unwrap()
    }

    fn tr400() -> Transformer {
        Transformer::new(400.0, 0.0).unwrap()
    }

    #[test]
    fn aggregate_examples() {
        assert_eq!(aggregate_load(&[60.0, 60.0], &[]), 120.0);
        assert!((aggregate_load(&[150.0], &[11.0, 3.7]) - 164.7).abs() < 1e-12);
        assert_eq!(aggregate_load(&[0.0; 126], &[]), 0.0);
    }

    #[test]
    fn available_capacity_examples() {
        assert_eq!(available_capacity(&tr400(), 150.0), 250.0);
        let buffered = Transformer::new(400.0, 20.0).unwrap();
        assert_eq!(available_capacity(&buffered, 390.0), 0.0);
        assert_eq!(available_capacity(&tr400(), 0.0), 400.0);
    }

    #[test]
    fn transformer_invariants() {
        assert!(Transformer::new(0.0, 0.0).is_err());
        assert!(Transformer::new(400.0, 400.0).is_err());
        assert!(Transformer::new(400.0, -1.0).is_err());
    }

    #[test]
    fn no_overload_below_capacity() {
        let s = LoadSeries::new(t0(), 1, vec![300.0, 400.0, 399.9]);
        assert!(detect_overloads(&s, &tr400()).is_empty());
    }

    #[test]
    fn hour_seventeen_trace() {
        let mut values = vec![300.0; 1440];
        for v in &mut values[17 * 60..17 * 60 + 18] {
            *v = 474.16;
        }
        let s = LoadSeries::new(t0(), 1, values);
        let events = detect_overloads(&s, &tr400());
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].start, t0() + 17 * 60);
        assert_eq!(events[0].duration, 18);
        assert!((events[0].peak_excess_kw - 74.16).abs() < 1e-9);

        let hourly = hourly_max(&s);
        assert_eq!(hourly.len(), 24);
        assert_eq!(hourly.values[17], 474.16);
        assert_eq!(hourly.values[16], 300.0);
        assert_eq!(overloaded_hours(&events), vec![t0() + 17 * 60]);
    }

    #[test]
    fn separated_minutes_are_separate_events() {
        let s = LoadSeries::new(t0(), 1, vec![401.0, 300.0, 402.0]);
        let events = detect_overloads(&s, &tr400());
        assert_eq!(events.len(), 2);
        assert!(events.iter().all(|e| e.duration == 1));
    }

    #[test]
    fn overload_ignores_buffer() {
        let buffered = Transformer::new(400.0, 50.0).unwrap();
        let s = LoadSeries::new(t0(), 1, vec![380.0; 10]);
        assert!(detect_overloads(&s, &buffered).is_empty());
    }

    #[test]
    fn hourly_max_boundaries() {
        let s = LoadSeries::new(t0(), 1, vec![300.0; 60]);
        assert_eq!(hourly_max(&s).values, vec![300.0]);
        let s = LoadSeries::new(t0(), 1, vec![300.0; 90]);
        assert_eq!(hourly_max(&s).len(), 1);
        let s = LoadSeries::new(t0() + 30, 1, vec![300.0; 90]);
        let h = hourly_max(&s);
        assert_eq!(h.start, t0() + 60);
        assert_eq!(h.len(), 1);
        let s = LoadSeries::new(t0(), 15, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(hourly_max(&s).values, vec![4.0]);
        assert_eq!(hourly_mean(&s).values, vec![2.5]);
    }

    #[test]
    fn overloaded_hours_spanning_events() {
        let ev = OverloadEvent {
            start: t0() + 17 * 60 + 50,
            duration: 80,
            peak_excess_kw: 1.0,
        };
        assert_eq!(
            overloaded_hours(&[ev]),
            vec![t0() + 17 * 60, t0() + 18 * 60, t0() + 19 * 60]
        );
    }

    proptest! {
        #[test]
        fn overload_durations_sum_to_overloaded_minutes(
            values in prop::collection::vec(prop_oneof![0.0..399.0f64, 400.0..500.0f64], 1..400)
        ) {
            let s = LoadSeries::new(t0(), 1, values.clone());
            let events = detect_overloads(&s, &tr400());
            let total: i64 = events.iter().map(|e| e.duration).sum();
            let over = values.iter().filter(|&&v| v > 400.0).count() as i64;
            prop_assert_eq!(total, over);
            for w in events.windows(2) {
                prop_assert!(w[0].end() < w[1].start, "events must not touch");
            }
            for e in &events {
                prop_assert!(e.duration >= 1 && e.peak_excess_kw > 0.0);
            }
        }

        #[test]
        fn hourly_max_dominates_mean(values in prop::collection::vec(0.0..500.0f64, 60..600)) {
            let s = LoadSeries::new(t0(), 1, values);
            let mx = hourly_max(&s);
            let mean = hourly_mean(&s);
            prop_assert_eq!(mx.len(), mean.len());
            for (a, b) in mx.values.iter().zip(&mean.values) {
                prop_assert!(a + 1e-9 >= *b);
            }
        }

        #[test]
        fn aggregate_is_permutation_invariant(
            base in prop::collection::vec(0.0..5.0f64, 0..50),
            charge in prop::collection::vec(0.0..22.0f64, 0..50),
        ) {
            let total = aggregate_load(&base, &charge);
            let mut rb = base.clone();
            rb.reverse();
            let mut rc = charge.clone();
            rc.reverse();
            prop_assert!((aggregate_load(&rb, &rc) - total).abs() < 1e-9);
        }
    }
}
