//! Estimates with confidence intervals and the exact/Monte Carlo mode switch.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Default two-sided confidence level for Monte Carlo bands.
pub const DEFAULT_LEVEL: f64 = 0.99;

/// Default cap on `n` for single enumeration over `{-1,+1}^n`.
pub const ENUMERATION_CAP: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
}

/// How an expectation over the cube is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Exact enumeration; fails above the enumeration cap.
    Exact,
    /// Monte Carlo with the given number of draws.
    MonteCarlo { samples: usize },
    /// Exact when `n <= cap`, otherwise Monte Carlo with `samples` draws.
    Auto { samples: usize, cap: usize },
}

impl Mode {
    pub fn auto(samples: usize) -> Self {
        Mode::Auto { samples, cap: ENUMERATION_CAP }
    }

    /// Resolves to exact (`None`) or a Monte Carlo budget for dimension `n`.
    pub(crate) fn resolve(self, n: usize, cap: usize) -> crate::Result<Option<usize>> {
        match self {
            Mode::Exact if n <= cap => Ok(None),
            Mode::Exact => Err(crate::Error::EnumerationCap { n, cap }),
            Mode::MonteCarlo { samples } => Ok(Some(samples.max(1))),
            Mode::Auto { samples, cap: c } => {
                if n <= c.min(cap) {
                    Ok(None)
                } else {
                    Ok(Some(samples.max(1)))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub value: f64,
    /// Half-width of the two-sided band at `level`; zero for exact values.
    pub half_width: f64,
    pub level: f64,
    pub method: Method,
    pub n_samples: usize,
}

impl EstimateWithCI {
    pub fn exact(value: f64) -> Self {
        Self { value, half_width: 0.0, level: 1.0, method: Method::Exact, n_samples: 0 }
    }

    /// Normal-approximation band from a sample mean and sample variance.
    pub fn from_moments(mean: f64, variance: f64, n: usize, level: f64) -> Self {
        let se = (variance.max(0.0) / n.max(1) as f64).sqrt();
        Self {
            value: mean,
            half_width: z_quantile(level) * se,
            level,
            method: Method::MonteCarlo,
            n_samples: n,
        }
    }

    /// Band for a Bernoulli frequency `hits / n`.
    pub fn from_bernoulli(hits: u64, n: usize, level: f64) -> Self {
        let p = hits as f64 / n.max(1) as f64;
        Self::from_moments(p, p * (1.0 - p), n, level)
    }

    pub fn lower(&self) -> f64 {
        self.value - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.value + self.half_width
    }

    /// True when `other` lies inside this band widened by `slack`.
    pub fn contains(&self, other: f64, slack: f64) -> bool {
        (self.value - other).abs() <= self.half_width + slack
    }
}

/// Two-sided standard normal quantile: `z` with `P(|N(0,1)| <= z) = level`.
pub fn z_quantile(level: f64) -> f64 {
    let level = level.clamp(1e-12, 1.0 - 1e-15);
    standard_normal().inverse_cdf(0.5 + level / 2.0)
}

pub fn standard_normal() -> Normal {
    Normal::standard()
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    standard_normal().cdf(x)
}

/// Running mean/variance accumulator (Welford).
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        Moments { n, mean, m2 }
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance of the pushed values.
    pub fn variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m2 / self.n as f64
        }
    }

    pub fn estimate(&self, level: f64) -> EstimateWithCI {
        EstimateWithCI::from_moments(self.mean, self.variance(), self.n, level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_quantiles() {
        assert!((z_quantile(0.99) - 2.575_829_303_549).abs() < 1e-9);
        assert!((z_quantile(0.95) - 1.959_963_984_540).abs() < 1e-9);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let (a, b) = xs.split_at(17);
        let mut ma = Moments::default();
        let mut mb = Moments::default();
        a.iter().for_each(|&x| ma.push(x));
        b.iter().for_each(|&x| mb.push(x));
        let m = ma.merge(mb);
        assert!((m.mean() - all.mean()).abs() < 1e-14);
        assert!((m.variance() - all.variance()).abs() < 1e-14);
    }

    #[test]
    fn exact_estimate_has_zero_width() {
        let e = EstimateWithCI::exact(0.25);
        assert_eq!(e.half_width, 0.0);
        assert_eq!(e.method, Method::Exact);
    }

    #[test]
    fn mode_resolution() {
        assert_eq!(Mode::Exact.resolve(10, 20).unwrap(), None);
        assert!(Mode::Exact.resolve(21, 20).is_err());
        assert_eq!(Mode::auto(100).resolve(30, 20).unwrap(), Some(100));
        assert_eq!(Mode::MonteCarlo { samples: 5 }.resolve(3, 20).unwrap(), Some(5));
    }
}
