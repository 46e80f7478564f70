use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::quad::integrate;
use crate::{Error, Result};

/// `2 e^{1/4} / sqrt(pi)`.
pub const TILTING_CONSTANT: f64 = 2.0 * 1.284_025_416_687_741_5 / 1.772_453_850_905_516;

/// Half-width of the integration window around the Gaussian centre.
const WINDOW: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltingReport {
    pub b: f64,
    /// `E_{s~Q}[(N(s; b, 1) / Q(s))^2]` with `Q(s) = e^{-|s|}/2`, in closed form:
    /// `(e^{b+1/4} erfc(-b-1/2) + e^{-b+1/4} erfc(b-1/2)) / (2 sqrt(pi))`.
    pub exact: f64,
    /// Quadrature of `(1/pi) int e^{-(s-b)^2 + |s|} ds`.
    pub exact_quadrature: f64,
    /// `(e^{b+1/4} + e^{-b+1/4}) / sqrt(pi)`: the same integral with
    /// `e^{|s|}` replaced by `e^s + e^{-s}`.
    pub majorant: f64,
    /// Quadrature of `(1/pi) int e^{-(s-b)^2} (e^s + e^{-s}) ds`.
    pub majorant_quadrature: f64,
    /// `TILTING_CONSTANT * e^{|b|}`.
    pub bound: f64,
}

impl TiltingReport {
    /// Largest disagreement between a closed form and its quadrature.
    pub fn quadrature_gap(&self) -> f64 {
        (self.exact - self.exact_quadrature).abs().max((self.majorant - self.majorant_quadrature).abs())
    }

    pub fn within_bound(&self) -> bool {
        self.exact <= self.bound && self.majorant <= self.bound * (1.0 + 1e-14)
    }
}

fn quad(f: impl Fn(f64) -> f64 + Copy, b: f64) -> Result<f64> {
    let lo = b.min(0.0) - WINDOW;
    let hi = b.max(0.0) + WINDOW;
    // split at the kink of |s|
    let (left, _) = integrate(f, lo, 0.0, 1e-15, 1e-15)?;
    let (right, _) = integrate(f, 0.0, hi, 1e-15, 1e-15)?;
    Ok(left + right)
}

/// Second moment of the likelihood ratio between `N(b, 1)` and the Laplace
/// density, with quadrature cross-checks.
pub fn tilting_second_moment(b: f64) -> Result<TiltingReport> {
    if !b.is_finite() {
        return Err(Error::config("b must be finite"));
    }
    let sqrt_pi = PI.sqrt();
    let up = (b + 0.25).exp();
    let down = (-b + 0.25).exp();
    let exact = (up * erfc(-b - 0.5) + down * erfc(b - 0.5)) / (2.0 * sqrt_pi);
    let majorant = (up + down) / sqrt_pi;
    let exact_quadrature = quad(|s: f64| (-(s - b) * (s - b) + s.abs()).exp() / PI, b)?;
    let majorant_quadrature =
        quad(|s: f64| ((-(s - b) * (s - b) + s).exp() + (-(s - b) * (s - b) - s).exp()) / PI, b)?;
    Ok(TiltingReport {
        b,
        exact,
        exact_quadrature,
        majorant,
        majorant_quadrature,
        bound: TILTING_CONSTANT * b.abs().exp(),
    })
}
