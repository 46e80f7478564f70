use serde::{Deserialize, Serialize};

use super::bits::BitVector;
use crate::error::check_dim;
use crate::{Error, Result};

/// Sign with the shared convention `sign(0) = +1`.
#[inline]
pub fn sign(v: f64) -> i8 {
    if v >= 0.0 {
        1
    } else {
        -1
    }
}

/// A real-valued function on `{-1,+1}^n`.
pub trait CubeFunction: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[i8]) -> f64;
}

/// Adapts a closure into a [`CubeFunction`].
pub struct FnCube<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[i8]) -> f64 + Sync> FnCube<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[i8]) -> f64 + Sync> CubeFunction for FnCube<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[i8]) -> f64 {
        (self.f)(x)
    }
}

/// `f(x) = sign(<w, x> - theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LtfRepr", into = "LtfRepr")]
pub struct LinearThresholdFunction {
    w: Vec<f64>,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct LtfRepr {
    w: Vec<f64>,
    theta: f64,
}

impl TryFrom<LtfRepr> for LinearThresholdFunction {
    type Error = Error;
    fn try_from(r: LtfRepr) -> Result<Self> {
        LinearThresholdFunction::new(r.w, r.theta)
    }
}

impl From<LinearThresholdFunction> for LtfRepr {
    fn from(f: LinearThresholdFunction) -> Self {
        LtfRepr { w: f.w, theta: f.theta }
    }
}

impl LinearThresholdFunction {
    pub fn new(w: Vec<f64>, theta: f64) -> Result<Self> {
        if w.is_empty() || w.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroVector);
        }
        if !theta.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("halfspace parameters must be finite"));
        }
        Ok(Self { w, theta })
    }

    pub fn majority(n: usize) -> Self {
        Self { w: vec![1.0; n.max(1)], theta: 0.0 }
    }

    /// `x_i` as a halfspace.
    pub fn dictator(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::config(format!("dictator index {i} out of range for n = {n}")));
        }
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Ok(Self { w, theta: 0.0 })
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    /// `<w, x> - theta` without dimension checks.
    #[inline]
    pub fn margin(&self, x: &[i8]) -> f64 {
        let mut s = 0.0;
        for (w, &b) in self.w.iter().zip(x) {
            s += if b > 0 { *w } else { -*w };
        }
        s - self.theta
    }

    #[inline]
    pub fn eval_raw(&self, x: &[i8]) -> i8 {
        sign(self.margin(x))
    }

    pub fn eval(&self, x: &BitVector) -> Result<i8> {
        ltf_eval(self, x)
    }
}

impl CubeFunction for LinearThresholdFunction {
    fn dim(&self) -> usize {
        self.w.len()
    }
    fn eval(&self, x: &[i8]) -> f64 {
        self.eval_raw(x) as f64
    }
}

pub fn ltf_eval(f: &LinearThresholdFunction, x: &BitVector) -> Result<i8> {
    check_dim(f.dim(), x.len())?;
    Ok(f.eval_raw(x.as_slice()))
}
