//! EV adoption as a Poisson process driven by a cumulative adoption curve.
//!
//! Curve points are `(year, cumulative adopters on January 1 of that year)`. Between points the
//! curve is linear in time, so the intensity is constant within each segment and equals the
//! segment's increment. The first point's value is the stock already present at that instant.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{Catalog, EvModel, HouseholdId};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::time::Timestamp;

#[derive(Debug, Clone, PartialEq)]
pub struct AdoptionCurve {
    points: Vec<(i32, u32)>,
}

impl AdoptionCurve {
    pub fn new(points: Vec<(i32, u32)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("adoption curve has no points"));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(format!(
                    "adoption curve years must increase ({} after {})",
                    w[1].0, w[0].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::invalid(format!(
                    "adoption curve decreases from {} to {} in {}",
                    w[0].1, w[1].1, w[1].0
                )));
            }
        }
        for &(year, _) in &points {
            Timestamp::start_of_year(year)?;
        }
        Ok(AdoptionCurve { points })
    }

    /// Illustrative curve reaching 126 households within 2039 (about 93 by the end of 2032,
    /// 121 by 2036). Replace with real curve data for quantitative work.
    pub fn placeholder() -> Self {
        AdoptionCurve::new(vec![
            (2020, 2),
            (2021, 4),
            (2022, 7),
            (2023, 11),
            (2024, 17),
            (2025, 25),
            (2026, 35),
            (2027, 46),
            (2028, 58),
            (2029, 69),
            (2030, 78),
            (2031, 86),
            (2032, 90),
            (2033, 96),
            (2034, 105),
            (2035, 113),
            (2036, 121),
            (2037, 123),
            (2038, 124),
            (2039, 125),
            (2040, 126),
        ])
        .expect("placeholder curve is valid")
    }

    pub fn points(&self) -> &[(i32, u32)] {
        &self.points
    }

    pub fn final_value(&self) -> u32 {
        self.points.last().map(|p| p.1).unwrap_or(0)
    }

    /// Instant at which the curve reaches its final value.
    pub fn end(&self) -> Timestamp {
        Timestamp::start_of_year(self.points.last().expect("non-empty").0).expect("validated")
    }

    /// Piecewise-linear cumulative value at `t`.
    pub fn value_at(&self, t: Timestamp) -> f64 {
        let first = self.points[0];
        if t < Timestamp::start_of_year(first.0).expect("validated") {
            return 0.0;
        }
        for w in self.points.windows(2) {
            let a = Timestamp::start_of_year(w[0].0).expect("validated");
            let b = Timestamp::start_of_year(w[1].0).expect("validated");
            if t < b {
                let frac = (t - a) as f64 / (b - a) as f64;
                return w[0].1 as f64 + frac * (w[1].1 as f64 - w[0].1 as f64);
            }
        }
        self.final_value() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adoption {
    pub household: HouseholdId,
    pub at: Timestamp,
    pub model: EvModel,
}

/// Draw adoption events for `households`.
///
/// Each segment contributes a Poisson-distributed count with mean equal to its increment,
/// spread uniformly over the segment. Draws beyond the curve's final value are dropped, and
/// any shortfall left when the last segment closes is topped up inside that segment, so every
/// household has adopted by the curve end.
pub fn sample_adoptions(
    curve: &AdoptionCurve,
    households: &[HouseholdId],
    catalog: &Catalog,
    adoption_rng: &mut RngStream,
    model_rng: &mut RngStream,
) -> Result<Vec<Adoption>> {
    let cap = curve.final_value();
    if cap as usize > households.len() {
        return Err(Error::invalid(format!(
            "adoption curve ends at {cap} adopters but only {} households exist",
            households.len()
        )));
    }
    let mut remaining: Vec<HouseholdId> = households.to_vec();
    remaining.sort();
    let mut out = Vec::with_capacity(cap as usize);

    let mut adopt = |at: Timestamp, remaining: &mut Vec<HouseholdId>, rng: &mut RngStream| {
        let idx = rng.random_range(0..remaining.len());
        let household = remaining.remove(idx);
        out.push(Adoption {
            household,
            at,
            model: catalog.sample(model_rng).clone(),
        });
    };

    let points = curve.points();
    let first_at = Timestamp::start_of_year(points[0].0)?;
    for _ in 0..points[0].1.min(cap) {
        adopt(first_at, &mut remaining, adoption_rng);
    }
    let mut adopted = points[0].1.min(cap);

    let segments = points.len().saturating_sub(1);
    for (i, w) in points.windows(2).enumerate() {
        let start = Timestamp::start_of_year(w[0].0)?;
        let end = Timestamp::start_of_year(w[1].0)?;
        let increment = (w[1].1 - w[0].1) as f64;
        let mut n = if increment > 0.0 {
            let poisson = Poisson::new(increment)
                .map_err(|e| Error::invalid(format!("adoption intensity: {e}")))?;
            poisson.sample(adoption_rng) as u32
        } else {
            0
        };
        n = n.min(cap - adopted);
        if i + 1 == segments {
            n = cap - adopted;
        }
        let len = end - start;
        let mut times: Vec<Timestamp> = (0..n)
            .map(|_| start + adoption_rng.random_range(0..len))
            .collect();
        times.sort();
        for at in times {
            adopt(at, &mut remaining, adoption_rng);
        }
        adopted += n;
    }
    Ok(out)
}
