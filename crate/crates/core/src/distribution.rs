use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution a model input (parameter or initial condition) is drawn from.
///
/// Only `Normal` (`mean`, `stdev`) and `Uniform` (`low`, `high`) can be
/// sampled; other names are carried through reports unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub target: String,
    pub distribution_name: String,
    pub parameters: BTreeMap<String, f64>,
    #[serde(default)]
    pub probonto_code: Option<String>,
}

impl DistributionSpec {
    pub fn normal(target: &str, mean: f64, stdev: f64) -> Self {
        Self {
            target: target.into(),
            distribution_name: "Normal".into(),
            parameters: BTreeMap::from([("mean".into(), mean), ("stdev".into(), stdev)]),
            probonto_code: None,
        }
    }

    pub fn uniform(target: &str, low: f64, high: f64) -> Self {
        Self {
            target: target.into(),
            distribution_name: "Uniform".into(),
            parameters: BTreeMap::from([("low".into(), low), ("high".into(), high)]),
            probonto_code: None,
        }
    }

    fn param(&self, name: &str) -> Result<f64> {
        self.parameters.get(name).copied().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "{} distribution for {:?} is missing parameter {name:?}",
                self.distribution_name, self.target
            ))
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.target.is_empty() {
            return Err(Error::InvalidArgument("distribution target is empty".into()));
        }
        if self.parameters.is_empty() {
            return Err(Error::InvalidArgument(format!("distribution for {:?} has no parameters", self.target)));
        }
        if let Some((k, v)) = self.parameters.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("parameter {k:?} is not finite ({v})")));
        }
        match self.distribution_name.as_str() {
            "Normal" => {
                self.param("mean")?;
                let sd = self.param("stdev")?;
                if !(sd > 0.0) {
                    return Err(Error::InvalidArgument(format!("Normal stdev must be > 0, got {sd}")));
                }
            }
            "Uniform" => {
                let (lo, hi) = (self.param("low")?, self.param("high")?);
                if !(lo < hi) {
                    return Err(Error::InvalidArgument(format!("Uniform needs low < high, got {lo} and {hi}")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.validate()?;
        match self.distribution_name.as_str() {
            "Normal" => {
                let d = Normal::new(self.param("mean")?, self.param("stdev")?)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                Ok(d.sample(rng))
            }
            "Uniform" => {
                let d = Uniform::new(self.param("low")?, self.param("high")?)
                    .map_err(|e| Error::InvalidArgument(e.to_string()))?;
                Ok(d.sample(rng))
            }
            other => Err(Error::InvalidArgument(format!("cannot sample from distribution {other:?}"))),
        }
    }

    /// Same family with location and scale multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for v in out.parameters.values_mut() {
            *v *= factor;
        }
        out
    }
}
