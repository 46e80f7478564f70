use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::hypercube::PlantedDataConfig;
use crate::regression::LearnConfig;
use crate::{Error, Result};

/// Monte Carlo budget: each step multiplies sample counts by ten.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    #[default]
    Smoke,
    Standard,
    Thorough,
}

impl Profile {
    pub fn factor(self) -> usize {
        match self {
            Profile::Smoke => 1,
            Profile::Standard => 10,
            Profile::Thorough => 100,
        }
    }
}

impl FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smoke" => Ok(Profile::Smoke),
            "standard" => Ok(Profile::Standard),
            "thorough" => Ok(Profile::Thorough),
            _ => Err(Error::config(format!("unknown profile `{s}` (smoke, standard, thorough)"))),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Smoke => "smoke",
            Profile::Standard => "standard",
            Profile::Thorough => "thorough",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    /// Fresh test examples.
    pub test_size: usize,
    /// Smoothing rate of the benchmark.
    pub sigma: f64,
    /// Draws for the smoothed benchmark when `n` is too large to enumerate.
    #[serde(default = "default_smoothed_samples")]
    pub smoothed_samples: usize,
    /// Record wall-clock time. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub timing: bool,
}

fn default_smoothed_samples() -> usize {
    200_000
}

/// Lemma checks to run alongside the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub ids: Vec<String>,
    #[serde(default)]
    pub profile: Profile,
}

/// Values to sweep; an empty or missing list keeps the base value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default)]
    pub degrees: Vec<usize>,
    #[serde(default)]
    pub samples: Vec<usize>,
    #[serde(default)]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

/// Experiment description, read from TOML.
///
/// ```toml
/// name = "majority-10"
/// seed = 1
///
/// [data]
/// n = 3
/// planted = { w = [1.0, 1.0, 1.0], theta = 0.0 }
/// label_noise = { kind = "rcn", eta = 0.1 }
/// marginal = { kind = "product", minus_probs = [0.5, 0.5, 0.5] }
///
/// [learn]
/// degree = 1
/// epsilon = 0.1
/// delta = 0.1
/// samples_per_repetition = 500
///
/// [eval]
/// test_size = 10000
/// sigma = 0.02
///
/// [sweep]
/// seeds = [0, 1, 2]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub data: PlantedDataConfig,
    pub learn: LearnConfig,
    pub eval: EvalSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<CheckSection>,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        Ok(toml::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Validation that needs no computation.
    pub fn validate(&self) -> Result<()> {
        self.data.validate()?;
        self.learn.validate(self.data.n)?;
        if self.eval.test_size == 0 {
            return Err(Error::config("test_size must be positive"));
        }
        crate::error::check_unit("sigma", self.eval.sigma)?;
        if self.eval.smoothed_samples == 0 {
            return Err(Error::config("smoothed_samples must be positive"));
        }
        if let Some(c) = &self.checks {
            for id in &c.ids {
                if !super::lemmas::LEMMA_IDS.contains(&id.as_str()) {
                    return Err(Error::UnknownCheck(id.clone()));
                }
            }
        }
        Ok(())
    }
}
