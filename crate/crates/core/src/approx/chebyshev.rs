use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::poly::DensePolynomial;
use crate::{Error, Result};

/// Highest degree [`exp_neg_approx`] will try.
pub const MAX_DEGREE: usize = 400;

const NODES: usize = 1024;
const GRID: usize = 10_000;

/// `sum_k c_k T_k(t)` with `t = (2x - lo - hi) / (hi - lo)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevSeries {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

impl ChebyshevSeries {
    /// Interpolates `f` at the `nodes` Chebyshev points of `[lo, hi]`.
    pub fn interpolate(f: impl Fn(f64) -> f64, lo: f64, hi: f64, nodes: usize) -> Self {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let vals: Vec<(f64, f64)> = (0..nodes)
            .map(|j| {
                let th = PI * (j as f64 + 0.5) / nodes as f64;
                (th, f(mid + half * th.cos()))
            })
            .collect();
        let coeffs = (0..nodes)
            .map(|k| {
                let s: f64 = vals.iter().map(|&(th, v)| v * (k as f64 * th).cos()).sum();
                let c = 2.0 * s / nodes as f64;
                if k == 0 {
                    c / 2.0
                } else {
                    c
                }
            })
            .collect();
        Self { lo, hi, coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn truncate(&self, degree: usize) -> Self {
        let len = (degree + 1).min(self.coeffs.len());
        Self { lo: self.lo, hi: self.hi, coeffs: self.coeffs[..len].to_vec() }
    }

    /// Clenshaw recurrence.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b;
        }
        t * b1 - b2 + self.coeffs.first().copied().unwrap_or(0.0)
    }

    /// The same polynomial in the monomial basis of `x`.
    ///
    /// Badly conditioned at high degree on long intervals; evaluate with
    /// [`ChebyshevSeries::eval`] when accuracy matters.
    pub fn to_dense(&self) -> DensePolynomial {
        let m = self.coeffs.len();
        // monomial coefficients in t
        let mut in_t = vec![0.0; m];
        let (mut prev, mut cur) = (vec![1.0], vec![0.0, 1.0]);
        for (k, &c) in self.coeffs.iter().enumerate() {
            let tk: &[f64] = match k {
                0 => &prev,
                1 => &cur,
                _ => {
                    let mut next = vec![0.0; k + 1];
                    for (i, &v) in cur.iter().enumerate() {
                        next[i + 1] += 2.0 * v;
                    }
                    for (i, &v) in prev.iter().enumerate() {
                        next[i] -= v;
                    }
                    prev = std::mem::replace(&mut cur, next);
                    &cur
                }
            };
            for (i, &v) in tk.iter().enumerate() {
                in_t[i] += c * v;
            }
        }
        // substitute t = a x + b
        let a = 2.0 / (self.hi - self.lo);
        let b = -(self.hi + self.lo) / (self.hi - self.lo);
        let mut out: Vec<f64> = Vec::with_capacity(m);
        for &c in in_t.iter().rev() {
            let mut next = vec![0.0; out.len() + 1];
            for (i, &v) in out.iter().enumerate() {
                next[i] += b * v;
                next[i + 1] += a * v;
            }
            next[0] += c;
            out = next;
        }
        DensePolynomial::new(out)
    }
}

fn grid_point(t: f64, j: usize) -> f64 {
    t * j as f64 / (GRID + 1) as f64
}

/// Largest `|p(x) - e^{-x}|` over the grid, or the first value above `stop`.
fn grid_error(p: &ChebyshevSeries, t: f64, stop: f64) -> f64 {
    let mut worst = 0.0f64;
    // x = 0 first: the truncation error of e^{-x} peaks there
    for j in std::iter::once(0).chain(1..=GRID + 1) {
        let x = grid_point(t, j);
        worst = worst.max((p.eval(x) - (-x).exp()).abs());
        if worst > stop {
            break;
        }
    }
    worst
}

fn check_interval(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("interval endpoint T = {t} must be positive")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpNegApprox {
    pub series: ChebyshevSeries,
    pub poly: DensePolynomial,
    pub degree: usize,
    /// Sup error over `10^4` interior grid points and both endpoints.
    pub sup_error: f64,
    /// Largest monomial coefficient magnitude.
    pub max_abs_coeff: f64,
    /// `ln(max |c_i|) / sqrt(T ln(1/eps))`.
    pub coeff_exponent: f64,
}

/// Lowest-degree truncated Chebyshev expansion of `e^{-x}` on `[0, T]` whose
/// grid sup error is at most `eps`.
pub fn exp_neg_approx(t: f64, eps: f64) -> Result<ExpNegApprox> {
    check_interval(t)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::config(format!("eps = {eps} must lie in (0, 1)")));
    }
    let full = ChebyshevSeries::interpolate(|x| (-x).exp(), 0.0, t, NODES);
    let mut best = f64::INFINITY;
    for m in 0..=MAX_DEGREE {
        let s = full.truncate(m);
        let err = grid_error(&s, t, eps);
        best = best.min(err);
        if err <= eps {
            let poly = s.to_dense();
            let max_abs_coeff = poly.max_abs_coeff();
            return Ok(ExpNegApprox {
                poly,
                degree: m,
                sup_error: err,
                max_abs_coeff,
                coeff_exponent: max_abs_coeff.ln() / (t * (1.0 / eps).ln()).sqrt(),
                series: s,
            });
        }
    }
    Err(Error::DegreeCap { cap: MAX_DEGREE, target: eps, best })
}

/// Grid sup error of the degree-`m` truncation for every `m <= max_degree`.
pub fn exp_neg_error_profile(t: f64, max_degree: usize) -> Result<Vec<f64>> {
    check_interval(t)?;
    let full = ChebyshevSeries::interpolate(|x| (-x).exp(), 0.0, t, NODES);
    Ok((0..=max_degree.min(MAX_DEGREE)).map(|m| grid_error(&full.truncate(m), t, f64::INFINITY)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_reproduces_polynomials() {
        let s = ChebyshevSeries::interpolate(|x| 3.0 - x + 0.5 * x * x, -1.0, 2.0, 16);
        for &c in &s.coeffs[3..] {
            assert!(c.abs() < 1e-14);
        }
        let d = s.truncate(2).to_dense();
        let want = [3.0, -1.0, 0.5];
        for (a, b) in d.coeffs().iter().zip(want) {
            assert!((a - b).abs() < 1e-13, "{d}");
        }
        assert!((s.eval(1.5) - (3.0 - 1.5 + 0.5 * 2.25)).abs() < 1e-13);
    }

    #[test]
    fn meets_target_on_ten() {
        let a = exp_neg_approx(10.0, 1e-3).unwrap();
        assert!(a.sup_error <= 1e-3);
        assert!((a.series.eval(0.0) - 1.0).abs() <= 1e-3);
        // one degree less misses
        let lower = grid_error(&a.series.truncate(a.degree - 1), 10.0, f64::INFINITY);
        assert!(lower > 1e-3);
    }

    #[test]
    fn dense_form_agrees_at_moderate_degree() {
        let a = exp_neg_approx(2.0, 1e-6).unwrap();
        for j in 0..=20 {
            let x = 0.1 * j as f64;
            assert!((a.poly.eval(x) - a.series.eval(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn degree_grows_like_sqrt_t() {
        let d1 = exp_neg_approx(12.5, 1e-3).unwrap().degree;
        let d2 = exp_neg_approx(50.0, 1e-3).unwrap().degree;
        assert!(d2 as f64 / d1 as f64 <= 2.5, "{d1} {d2}");
    }

    #[test]
    fn error_profile_is_monotone() {
        let prof = exp_neg_error_profile(25.0, 40).unwrap();
        for w in prof.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(exp_neg_approx(0.0, 0.1).is_err());
        assert!(exp_neg_approx(1.0, 1.0).is_err());
        assert!(matches!(exp_neg_approx(1e6, 1e-12), Err(Error::DegreeCap { .. })));
    }
}
