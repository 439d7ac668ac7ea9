use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EvModel {
    pub name: String,
    pub battery_kwh: f64,
    pub max_rate_kw: f64,
    pub market_share: f64,
}

impl EvModel {
    pub fn new(
        name: impl Into<String>,
        battery_kwh: f64,
        max_rate_kw: f64,
        market_share: f64,
    ) -> Self {
        EvModel {
            name: name.into(),
            battery_kwh,
            max_rate_kw,
            market_share,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.battery_kwh.is_finite() && self.battery_kwh > 0.0) {
            return Err(Error::invalid(format!(
                "{}: battery_kwh must be > 0",
                self.name
            )));
        }
        if !(self.max_rate_kw.is_finite() && self.max_rate_kw > 0.0) {
            return Err(Error::invalid(format!(
                "{}: max_rate_kw must be > 0",
                self.name
            )));
        }
        if !(0.0..=1.0).contains(&self.market_share) {
            return Err(Error::invalid(format!(
                "{}: market_share must be in [0, 1]",
                self.name
            )));
        }
        Ok(())
    }
}

/// Model catalog with market shares used for the adoption model draw.
#[derive(Debug, Clone)]
pub struct Catalog {
    models: Vec<EvModel>,
    weights: WeightedIndex<f64>,
}

impl Catalog {
    pub fn new(models: Vec<EvModel>) -> Result<Self> {
        if models.is_empty() {
            return Err(Error::invalid("EV catalog is empty"));
        }
        for m in &models {
            m.validate()?;
        }
        let total: f64 = models.iter().map(|m| m.market_share).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "market shares sum to {total}, expected 1"
            )));
        }
        let weights = WeightedIndex::new(models.iter().map(|m| m.market_share))
            .map_err(|e| Error::invalid(format!("market shares: {e}")))?;
        Ok(Catalog { models, weights })
    }

    /// Placeholder top-five catalog. Only the Leaf's 3.7 kW and the 3.7/11 kW rate classes
    /// come from the case study; batteries and shares are illustrative.
    pub fn placeholder() -> Self {
        Catalog::new(vec![
            EvModel::new("Tesla Model 3", 55.0, 11.0, 0.30),
            EvModel::new("Renault Zoe", 52.0, 11.0, 0.20),
            EvModel::new("Nissan Leaf", 40.0, 3.7, 0.20),
            EvModel::new("Volkswagen e-Golf", 35.8, 7.4, 0.15),
            EvModel::new("Hyundai Kona Electric", 64.0, 11.0, 0.15),
        ])
        .expect("placeholder catalog is valid")
    }

    pub fn models(&self) -> &[EvModel] {
        &self.models
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.weights.sample(rng)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &EvModel {
        &self.models[self.sample_index(rng)]
    }
}
