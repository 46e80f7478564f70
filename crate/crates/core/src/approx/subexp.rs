use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::SeedStream;
use crate::stats::{EstimateWithCI, Moments, DEFAULT_LEVEL};
use crate::{Error, Result};

/// Tail `P(|x| > t) <= 2 exp(-(t/lambda)^{1+alpha_tail})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct TailProfile {
    lambda: f64,
    alpha_tail: f64,
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    lambda: f64,
    alpha_tail: f64,
}

impl TryFrom<ProfileRepr> for TailProfile {
    type Error = Error;
    fn try_from(r: ProfileRepr) -> Result<Self> {
        TailProfile::new(r.lambda, r.alpha_tail)
    }
}

impl From<TailProfile> for ProfileRepr {
    fn from(p: TailProfile) -> Self {
        ProfileRepr { lambda: p.lambda, alpha_tail: p.alpha_tail }
    }
}

impl TailProfile {
    pub fn new(lambda: f64, alpha_tail: f64) -> Result<Self> {
        if lambda > 0.0 && lambda.is_finite() && alpha_tail > 0.0 && alpha_tail.is_finite() {
            Ok(Self { lambda, alpha_tail })
        } else {
            Err(Error::config(format!("tail profile needs lambda > 0 and alpha > 0, got ({lambda}, {alpha_tail})")))
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha_tail(&self) -> f64 {
        self.alpha_tail
    }

    pub fn tail(&self, t: f64) -> f64 {
        2.0 * (-(t / self.lambda).powf(1.0 + self.alpha_tail)).exp()
    }
}

/// `E|x|^k <= 2 sqrt(2 pi) lambda^k m^{m + 1/2} e^{-m + 1/(12 m)}` with `m = k/(1+alpha)`.
///
/// This is the layer-cake bound `2k lambda^k Gamma(m) / (1+alpha)` with
/// Stirling's upper bound for the Gamma function.
pub fn subexp_moment_bound(k: u32, profile: &TailProfile) -> f64 {
    let m = f64::from(k) / (1.0 + profile.alpha_tail);
    2.0 * (2.0 * PI).sqrt() * profile.lambda.powi(k as i32) * m.powf(m + 0.5) * (-m + 1.0 / (12.0 * m)).exp()
}

/// `E e^{a|x|} <= 3 exp(2^{1/alpha} (a lambda)^{1 + 1/alpha})`.
pub fn subexp_mgf_bound(a: f64, profile: &TailProfile) -> f64 {
    let al = profile.alpha_tail;
    3.0 * (2f64.powf(1.0 / al) * (a * profile.lambda).powf(1.0 + 1.0 / al)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub empirical: EstimateWithCI,
    pub bound: f64,
    /// `empirical / bound`.
    pub slack_ratio: f64,
    /// The lower end of the band is within the bound.
    pub pass: bool,
}

fn check(values: impl Iterator<Item = f64>, bound: f64) -> Result<BoundCheck> {
    let mut m = Moments::default();
    values.for_each(|v| m.push(v));
    if m.count() == 0 {
        return Err(Error::Empty("samples"));
    }
    let empirical = m.estimate(DEFAULT_LEVEL);
    Ok(BoundCheck { empirical, bound, slack_ratio: empirical.value / bound, pass: empirical.lower() <= bound })
}

pub fn subexp_moment_check(samples: &[f64], k: u32, profile: &TailProfile) -> Result<BoundCheck> {
    if k == 0 {
        return Err(Error::config("moment order must be at least 1"));
    }
    check(samples.iter().map(|x| x.abs().powi(k as i32)), subexp_moment_bound(k, profile))
}

pub fn subexp_mgf_check(samples: &[f64], a: f64, profile: &TailProfile) -> Result<BoundCheck> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::config(format!("a = {a} must be positive")));
    }
    check(samples.iter().map(|x| (a * x.abs()).exp()), subexp_mgf_bound(a, profile))
}

/// Finitely supported law on the reals, used as a sample proxy with exactly
/// known moments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLaw {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteLaw {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Empty("atoms"));
        }
        if atoms.iter().any(|&(v, p)| !v.is_finite() || !(0.0..=1.0).contains(&p)) {
            return Err(Error::config("atoms need finite values and probabilities in [0, 1]"));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms })
    }

    pub fn rademacher() -> Self {
        Self { atoms: vec![(-1.0, 0.5), (1.0, 0.5)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// `E|x|^k`.
    pub fn abs_moment(&self, k: u32) -> f64 {
        self.atoms.iter().map(|&(v, p)| p * v.abs().powi(k as i32)).sum()
    }

    /// `E e^{a|x|}`.
    pub fn abs_mgf(&self, a: f64) -> f64 {
        self.atoms.iter().map(|&(v, p)| p * (a * v.abs()).exp()).sum()
    }

    /// Smallest `lambda` for which the law satisfies the tail profile with
    /// exponent `alpha_tail`.
    ///
    /// The survival function is a step function, so the binding points are
    /// the left limits at each positive atom magnitude `s`, where it equals
    /// `P(|x| >= s)`.
    pub fn calibrated_lambda(&self, alpha_tail: f64) -> f64 {
        let mut mags: Vec<f64> = self.atoms.iter().filter(|a| a.1 > 0.0).map(|a| a.0.abs()).collect();
        mags.sort_by(f64::total_cmp);
        mags.dedup();
        mags.iter()
            .filter(|&&s| s > 0.0)
            .map(|&s| {
                let surv: f64 = self.atoms.iter().filter(|a| a.0.abs() >= s).map(|a| a.1).sum();
                s / (2.0 / surv.min(1.0)).ln().powf(1.0 / (1.0 + alpha_tail))
            })
            .fold(0.0, f64::max)
    }

    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = SeedStream::new(seed).rng(0);
        (0..count)
            .map(|_| {
                let mut u: f64 = rng.random();
                for &(v, p) in &self.atoms {
                    if u < p {
                        return v;
                    }
                    u -= p;
                }
                self.atoms[self.atoms.len() - 1].0
            })
            .collect()
    }
}
