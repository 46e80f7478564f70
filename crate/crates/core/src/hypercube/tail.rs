use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::dist::Marginal;
use crate::par;
use crate::rng::SeedStream;
use crate::stats::DEFAULT_LEVEL;
use crate::{Error, Result};

/// Directions to probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Directions {
    /// This many Gaussian directions, normalized.
    Random(usize),
    /// Explicit vectors; normalized before use.
    Explicit(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProbeConfig {
    pub lambda: f64,
    pub alpha_tail: f64,
    pub directions: Directions,
    pub n_samples: usize,
    #[serde(default = "default_level")]
    pub level: f64,
}

fn default_level() -> f64 {
    DEFAULT_LEVEL
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub v: Vec<f64>,
    /// Point at which `survival - bound` is largest.
    pub worst_t: f64,
    pub survival: f64,
    pub bound: f64,
    /// `sup_t (survival(t) - bound(t))`, exact for the empirical law.
    pub excess: f64,
    /// DKW half-width on the empirical survival function.
    pub band: f64,
    pub violation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub directions: Vec<DirectionReport>,
    pub max_excess: f64,
    pub any_violation: bool,
}

/// `2 exp(-(t/lambda)^(1+alpha))`.
pub fn subexp_tail_bound(t: f64, lambda: f64, alpha_tail: f64) -> f64 {
    2.0 * (-(t / lambda).powf(1.0 + alpha_tail)).exp()
}

/// Compares the empirical law of `|<x, v>|` against the sub-exponential tail bound.
pub fn subexp_tail_probe(dist: &Marginal, cfg: &TailProbeConfig, seed: u64) -> Result<TailReport> {
    if !(cfg.lambda > 0.0) || !(cfg.alpha_tail > 0.0) {
        return Err(Error::config("tail probe needs lambda > 0 and alpha_tail > 0"));
    }
    let n = dist.dim();
    let seeds = SeedStream::new(seed);
    let dirs: Vec<Vec<f64>> = match &cfg.directions {
        Directions::Random(k) => {
            let mut rng = seeds.child(1).rng(0);
            (0..*k)
                .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
                .collect()
        }
        Directions::Explicit(vs) => vs.clone(),
    };
    let dirs = dirs
        .into_iter()
        .map(|v| {
            crate::error::check_dim(n, v.len())?;
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(Error::ZeroVector);
            }
            Ok(v.into_iter().map(|a| a / norm).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let points = super::dist::sample_marginal(dist, cfg.n_samples, seeds.child(2).master())?;
    let total = points.len() as f64;
    let band = ((2.0 / (1.0 - cfg.level)).ln() / (2.0 * total)).sqrt();

    let reports = par::map(&dirs, |v| {
        let mut a: Vec<f64> = points
            .iter()
            .map(|x| x.iter().zip(v).map(|(b, w)| b as f64 * w).sum::<f64>().abs())
            .collect();
        a.sort_unstable_by(f64::total_cmp);
        // For t just below a_j, the survival P[|S| > t] equals #{a >= a_j} / N.
        let mut best = (0.0, 0.0, subexp_tail_bound(0.0, cfg.lambda, cfg.alpha_tail), f64::NEG_INFINITY);
        let mut j = 0;
        while j < a.len() {
            let t = a[j];
            let surv = (a.len() - j) as f64 / total;
            let bound = subexp_tail_bound(t, cfg.lambda, cfg.alpha_tail);
            if t > 0.0 && surv - bound > best.3 {
                best = (t, surv, bound, surv - bound);
            }
            while j < a.len() && a[j] == t {
                j += 1;
            }
        }
        let at_zero = a.iter().filter(|&&s| s > 0.0).count() as f64 / total - 2.0;
        if at_zero > best.3 {
            best = (0.0, at_zero + 2.0, 2.0, at_zero);
        }
        DirectionReport {
            v: v.clone(),
            worst_t: best.0,
            survival: best.1,
            bound: best.2,
            excess: best.3,
            band,
            violation: best.3 - band > 0.0,
        }
    });
    let max_excess = reports.iter().map(|r| r.excess).fold(f64::NEG_INFINITY, f64::max);
    let any_violation = reports.iter().any(|r| r.violation);
    Ok(TailReport { directions: reports, max_excess, any_violation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::dist::ProductDistribution;

    fn probe(dist: &Marginal, lambda: f64, dirs: Directions) -> TailReport {
        let cfg = TailProbeConfig { lambda, alpha_tail: 1.0, directions: dirs, n_samples: 20_000, level: 0.99 };
        subexp_tail_probe(dist, &cfg, 11).unwrap()
    }

    #[test]
    fn rademacher_coordinate_is_within_bound() {
        let n = 6;
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let r = probe(&Marginal::uniform(n), 2.0, Directions::Explicit(vec![e1]));
        assert!(!r.any_violation);
    }

    #[test]
    fn uniform_sum_obeys_hoeffding_shape() {
        let n = 16;
        let r = probe(&Marginal::uniform(n), 2.0, Directions::Explicit(vec![vec![1.0; n]]));
        assert!(!r.any_violation, "{:?}", r.directions[0]);
        let r = probe(&Marginal::uniform(n), 2.0, Directions::Random(5));
        assert!(!r.any_violation);
    }

    #[test]
    fn tiny_scale_is_a_violation() {
        let n = 3;
        let d: Marginal = ProductDistribution::new(vec![0.5; n]).unwrap().into();
        let r = probe(&d, 0.01, Directions::Explicit(vec![vec![1.0, 0.0, 0.0]]));
        assert!(r.any_violation);
        assert!((r.directions[0].excess - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let cfg = TailProbeConfig {
            lambda: 0.0,
            alpha_tail: 1.0,
            directions: Directions::Random(1),
            n_samples: 10,
            level: 0.99,
        };
        assert!(subexp_tail_probe(&Marginal::uniform(2), &cfg, 0).is_err());
    }
}
