use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `c_0 + c_1 x + ... + c_m x^m`, trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensePolynomial {
    coeffs: Vec<f64>,
}

impl DensePolynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// One coefficient per line, constant term first.
    pub fn to_text(&self) -> String {
        self.coeffs.iter().map(|c| format!("{c:e}\n")).collect()
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let mut coeffs = Vec::new();
        for (i, line) in s.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let c: f64 = t
                .parse()
                .map_err(|e| Error::Parse { line: i + 1, message: format!("bad coefficient `{t}`: {e}") })?;
            coeffs.push(c);
        }
        Ok(Self::new(coeffs))
    }
}

impl fmt::Display for DensePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c} x")?,
                _ => write!(f, "{c} x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Degree `k - 1` Taylor polynomial of `e^x`: `sum_{i<k} x^i / i!`.
pub fn taylor_exp(k: usize) -> Result<DensePolynomial> {
    if k == 0 {
        return Err(Error::config("taylor_exp needs k >= 1"));
    }
    let mut coeffs = Vec::with_capacity(k);
    let mut c = 1.0;
    for i in 0..k {
        if i > 0 {
            c /= i as f64;
        }
        coeffs.push(c);
    }
    Ok(DensePolynomial::new(coeffs))
}
