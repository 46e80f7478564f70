use std::path::Path;

use serde::{Deserialize, Serialize};

use super::basis::MonomialBasis;
use super::matrix::dot;
use crate::error::check_dim;
use crate::hypercube::{sign, CubeFunction, LabeledSample};
use crate::{Error, Result};

/// Summary of the run that produced a hypothesis.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub samples_per_repetition: usize,
    pub repetitions: usize,
    pub validation_size: usize,
    pub chosen: usize,
    pub train_error: f64,
    pub validation_error: f64,
    pub l1_objective: f64,
    pub duality_gap: f64,
}

/// `h(x) = sign(p(x) - t)` with `p` a multilinear polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HypothesisRepr", into = "HypothesisRepr")]
pub struct PolynomialHypothesis {
    basis: MonomialBasis,
    coeffs: Vec<f64>,
    t: f64,
    meta: Option<TrainingMeta>,
}

#[derive(Serialize, Deserialize)]
struct HypothesisRepr {
    n: usize,
    degree: usize,
    basis: MonomialBasis,
    coeffs: Vec<f64>,
    threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<TrainingMeta>,
}

impl TryFrom<HypothesisRepr> for PolynomialHypothesis {
    type Error = Error;
    fn try_from(r: HypothesisRepr) -> Result<Self> {
        if r.n != r.basis.n() || r.degree != r.basis.degree() {
            return Err(Error::config("model header disagrees with its basis"));
        }
        let mut h = PolynomialHypothesis::new(r.basis, r.coeffs, r.threshold)?;
        h.meta = r.meta;
        Ok(h)
    }
}

impl From<PolynomialHypothesis> for HypothesisRepr {
    fn from(h: PolynomialHypothesis) -> Self {
        HypothesisRepr {
            n: h.basis.n(),
            degree: h.basis.degree(),
            basis: h.basis,
            coeffs: h.coeffs,
            threshold: h.t,
            meta: h.meta,
        }
    }
}

impl PolynomialHypothesis {
    pub fn new(basis: MonomialBasis, coeffs: Vec<f64>, t: f64) -> Result<Self> {
        check_dim(basis.len(), coeffs.len())?;
        if !(-1.0..=1.0).contains(&t) {
            return Err(Error::config(format!("threshold {t} outside [-1, 1]")));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::config("coefficients must be finite"));
        }
        Ok(Self { basis, coeffs, t, meta: None })
    }

    pub fn with_meta(mut self, meta: TrainingMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn threshold(&self) -> f64 {
        self.t
    }

    pub fn meta(&self) -> Option<&TrainingMeta> {
        self.meta.as_ref()
    }

    /// `p(x)`.
    pub fn poly(&self, x: &[i8]) -> f64 {
        let mut buf = vec![0.0; self.basis.len()];
        self.basis.expand_into(x, &mut buf);
        dot(&buf, &self.coeffs)
    }

    pub fn predict(&self, x: &[i8]) -> i8 {
        sign(self.poly(x) - self.t)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

impl CubeFunction for PolynomialHypothesis {
    fn dim(&self) -> usize {
        self.basis.n()
    }
    /// `p(x) - t`; its sign is the prediction.
    fn eval(&self, x: &[i8]) -> f64 {
        self.poly(x) - self.t
    }
}

/// Fraction of samples with `h(x) != y`.
pub fn evaluate(h: &PolynomialHypothesis, data: &[LabeledSample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("evaluation data"));
    }
    let mut buf = vec![0.0; h.basis.len()];
    let mut wrong = 0usize;
    for s in data {
        check_dim(h.basis.n(), s.x.len())?;
        h.basis.expand_into(s.x.as_slice(), &mut buf);
        if sign(dot(&buf, &h.coeffs) - h.t) != s.y {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::BitVector;

    fn sample(x: &[i8], y: i8) -> LabeledSample {
        LabeledSample::new(BitVector::new(x.to_vec()).unwrap(), y).unwrap()
    }

    #[test]
    fn self_labeled_and_flipped() {
        let b = MonomialBasis::new(3, 2).unwrap();
        let h = PolynomialHypothesis::new(b, vec![0.1, 1.0, -0.5, 0.2, 0.3, 0.0, -0.7], 0.05).unwrap();
        let mut data = Vec::new();
        crate::hypercube::for_each_point(3, |_, x| data.push(sample(x, h.predict(x))));
        assert_eq!(evaluate(&h, &data).unwrap(), 0.0);
        let flipped: Vec<_> = data.iter().map(|s| sample(s.x.as_slice(), -s.y)).collect();
        assert_eq!(evaluate(&h, &flipped).unwrap(), 1.0);
        assert!(evaluate(&h, &[]).is_err());
    }

    #[test]
    fn invariants_enforced() {
        let b = MonomialBasis::new(2, 1).unwrap();
        assert!(PolynomialHypothesis::new(b.clone(), vec![1.0, 2.0], 0.0).is_err());
        assert!(PolynomialHypothesis::new(b, vec![1.0, 2.0, 3.0], 1.5).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        let b = MonomialBasis::new(4, 2).unwrap();
        let coeffs: Vec<f64> = (0..b.len()).map(|i| (i as f64 * 0.123_456_789_012_345).sin() / 3.0).collect();
        let h = PolynomialHypothesis::new(b, coeffs, -0.3).unwrap().with_meta(TrainingMeta { seed: 9, ..Default::default() });
        let s = serde_json::to_string(&h).unwrap();
        let back: PolynomialHypothesis = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
    }
}
