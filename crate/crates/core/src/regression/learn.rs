use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::basis::{basis_size, MonomialBasis};
use super::lp::{l1_fit_weighted, Certificate, L1Options};
use super::model::{evaluate, PolynomialHypothesis, TrainingMeta};
use super::threshold::select_threshold_weighted;
use crate::hypercube::{generate_dataset, BitVector, LabeledSample, PlantedDataConfig};
use crate::par;
use crate::rng::SeedStream;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    /// Degree bound `d`.
    pub degree: usize,
    pub epsilon: f64,
    pub delta: f64,
    /// Samples per repetition, `N`.
    pub samples_per_repetition: usize,
    /// Repetitions `r`; defaults to `ceil(4 ln(2/delta) / epsilon)`.
    #[serde(default)]
    pub repetitions: Option<usize>,
    /// Validation size `V`; defaults to `ceil(8 ln(4r/delta) / epsilon^2)`.
    #[serde(default)]
    pub validation_size: Option<usize>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-8
}

impl LearnConfig {
    pub fn new(degree: usize, epsilon: f64, delta: f64, samples_per_repetition: usize) -> Self {
        Self {
            degree,
            epsilon,
            delta,
            samples_per_repetition,
            repetitions: None,
            validation_size: None,
            tol: default_tol(),
        }
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
            .unwrap_or_else(|| (4.0 * (2.0 / self.delta).ln() / self.epsilon).ceil() as usize)
    }

    pub fn validation_size(&self) -> usize {
        self.validation_size.unwrap_or_else(|| {
            let r = self.repetitions() as f64;
            (8.0 * (4.0 * r / self.delta).ln() / (self.epsilon * self.epsilon)).ceil() as usize
        })
    }

    /// Checks everything that does not depend on the dimension.
    pub fn validate_params(&self) -> Result<()> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if !open(self.epsilon) || !open(self.delta) {
            return Err(Error::config("epsilon and delta must lie in (0, 1)"));
        }
        if self.repetitions() == 0 || self.validation_size() == 0 {
            return Err(Error::config("repetitions and validation size must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::config("tolerance must be positive"));
        }
        Ok(())
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.validate_params()?;
        let m = basis_size(n, self.degree);
        if self.samples_per_repetition < m {
            return Err(Error::config(format!(
                "N = {} is below the basis size {m} for n = {n}, d = {}",
                self.samples_per_repetition, self.degree
            )));
        }
        Ok(())
    }
}

/// Supplies fresh labeled examples.
pub trait SampleSource {
    fn dim(&self) -> usize;
    /// `count` new samples; `seed` identifies the batch.
    fn draw(&mut self, count: usize, seed: u64) -> Result<Vec<LabeledSample>>;
}

/// Fresh draws from a planted distribution.
pub struct PlantedSource {
    cfg: PlantedDataConfig,
}

impl PlantedSource {
    pub fn new(cfg: PlantedDataConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { cfg })
    }
}

impl SampleSource for PlantedSource {
    fn dim(&self) -> usize {
        self.cfg.n
    }
    fn draw(&mut self, count: usize, seed: u64) -> Result<Vec<LabeledSample>> {
        generate_dataset(&self.cfg, count, seed)
    }
}

/// Hands out consecutive disjoint slices of a fixed dataset.
pub struct SliceSource<'a> {
    data: &'a [LabeledSample],
    next: usize,
}

impl<'a> SliceSource<'a> {
    pub fn new(data: &'a [LabeledSample]) -> Self {
        Self { data, next: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.next
    }
}

impl SampleSource for SliceSource<'_> {
    fn dim(&self) -> usize {
        self.data.first().map_or(0, |s| s.x.len())
    }
    fn draw(&mut self, count: usize, _seed: u64) -> Result<Vec<LabeledSample>> {
        if count > self.remaining() {
            return Err(Error::InsufficientSamples { needed: count, available: self.remaining() });
        }
        let out = self.data[self.next..self.next + count].to_vec();
        self.next += count;
        Ok(out)
    }
}

/// One run of the regression on a batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub train_error: f64,
    pub validation_error: f64,
    pub l1_objective: f64,
    pub certificate: Certificate,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnReport {
    pub hypothesis: PolynomialHypothesis,
    pub candidates: Vec<Candidate>,
    pub chosen: usize,
    pub repetition_seeds: Vec<u64>,
    pub validation_seed: u64,
}

/// Distinct `(x, y)` pairs with multiplicities.
fn group(batch: &[LabeledSample]) -> (Vec<&BitVector>, Vec<i8>, Vec<f64>) {
    let mut index: HashMap<(&BitVector, i8), usize> = HashMap::new();
    let (mut xs, mut ys, mut ws) = (Vec::new(), Vec::new(), Vec::new());
    for s in batch {
        match index.get(&(&s.x, s.y)) {
            Some(&k) => ws[k] += 1.0,
            None => {
                index.insert((&s.x, s.y), xs.len());
                xs.push(&s.x);
                ys.push(s.y);
                ws.push(1.0);
            }
        }
    }
    (xs, ys, ws)
}

/// L1 polynomial regression on one batch: fit, then pick the threshold.
pub fn fit_batch(
    batch: &[LabeledSample],
    basis: &MonomialBasis,
    tol: f64,
) -> Result<(PolynomialHypothesis, f64, Certificate, usize)> {
    if batch.is_empty() {
        return Err(Error::Empty("training batch"));
    }
    for s in batch {
        crate::error::check_dim(basis.n(), s.x.len())?;
    }
    let (xs, ys, ws) = group(batch);
    let rows: Vec<&[i8]> = xs.iter().map(|x| x.as_slice()).collect();
    let feats = basis.matrix(&rows);
    let yf: Vec<f64> = ys.iter().map(|&y| y as f64).collect();
    let fit = l1_fit_weighted(&feats, &yf, &ws, L1Options { tol, ..L1Options::default() })?;
    let preds = feats.mul_vec(&fit.coeffs);
    let t = select_threshold_weighted(&preds, &ys, &ws)?;
    let wrong: f64 = preds
        .iter()
        .zip(&ys)
        .zip(&ws)
        .filter(|((p, y), _)| crate::hypercube::sign(**p - t) != **y)
        .map(|(_, w)| w)
        .sum();
    let h = PolynomialHypothesis::new(basis.clone(), fit.coeffs, t)?;
    Ok((h, (wrong + 0.0) / batch.len() as f64, fit.certificate, fit.iterations))
}

/// Runs the regression on `r` disjoint batches and keeps the hypothesis with
/// the lowest validation error (first index on ties).
pub fn learn(source: &mut dyn SampleSource, cfg: &LearnConfig, seed: u64) -> Result<LearnReport> {
    let n = source.dim();
    cfg.validate(n)?;
    let basis = MonomialBasis::new(n, cfg.degree)?;
    let r = cfg.repetitions();
    let seeds = SeedStream::new(seed);
    let repetition_seeds: Vec<u64> = (0..r as u64).map(|i| seeds.child(i).master()).collect();
    let validation_seed = seeds.child(r as u64).master();
    let batches = repetition_seeds
        .iter()
        .map(|&s| source.draw(cfg.samples_per_repetition, s))
        .collect::<Result<Vec<_>>>()?;
    let validation = source.draw(cfg.validation_size(), validation_seed)?;

    let fits = par::map(&batches, |b| fit_batch(b, &basis, cfg.tol));
    let fits = fits.into_iter().collect::<Result<Vec<_>>>()?;
    let mut candidates = Vec::with_capacity(r);
    let mut chosen = 0;
    for (i, (h, train_error, certificate, iterations)) in fits.iter().enumerate() {
        let validation_error = evaluate(h, &validation)?;
        if validation_error < candidates.get(chosen).map_or(f64::INFINITY, |c: &Candidate| c.validation_error) {
            chosen = i;
        }
        candidates.push(Candidate {
            train_error: *train_error,
            validation_error,
            l1_objective: certificate.primal,
            certificate: *certificate,
            iterations: *iterations,
        });
    }
    let best = &candidates[chosen];
    let meta = TrainingMeta {
        seed,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        samples_per_repetition: cfg.samples_per_repetition,
        repetitions: r,
        validation_size: cfg.validation_size(),
        chosen,
        train_error: best.train_error,
        validation_error: best.validation_error,
        l1_objective: best.l1_objective,
        duality_gap: best.certificate.gap,
    };
    let hypothesis = fits.into_iter().nth(chosen).expect("chosen index in range").0.with_meta(meta);
    Ok(LearnReport { hypothesis, candidates, chosen, repetition_seeds, validation_seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::{LabelNoise, LinearThresholdFunction, Marginal};

    fn planted(n: usize, noise: LabelNoise, planted: LinearThresholdFunction) -> PlantedDataConfig {
        PlantedDataConfig { n, marginal: Marginal::uniform(n), planted, label_noise: noise }
    }

    #[test]
    fn default_sizes() {
        let c = LearnConfig::new(3, 0.1, 0.1, 5000);
        assert_eq!(c.repetitions(), 120);
        assert_eq!(c.validation_size(), 6782);
        assert!(c.validate(10).is_ok());
        assert!(LearnConfig::new(3, 0.1, 0.1, 100).validate(10).is_err());
        assert!(LearnConfig::new(1, 1.0, 0.1, 100).validate(3).is_err());
    }

    #[test]
    fn single_repetition_equals_one_fit() {
        let p = planted(5, LabelNoise::Rcn { eta: 0.1 }, LinearThresholdFunction::majority(5));
        let data = generate_dataset(&p, 700, 3).unwrap();
        let mut cfg = LearnConfig::new(2, 0.2, 0.2, 500);
        cfg.repetitions = Some(1);
        cfg.validation_size = Some(200);
        let rep = learn(&mut SliceSource::new(&data), &cfg, 0).unwrap();
        let (h, _, _, _) = fit_batch(&data[..500], &MonomialBasis::new(5, 2).unwrap(), 1e-8).unwrap();
        assert_eq!(rep.hypothesis.coeffs(), h.coeffs());
        assert_eq!(rep.hypothesis.threshold(), h.threshold());
    }

    #[test]
    fn realizable_degree_one() {
        let p = planted(6, LabelNoise::None, LinearThresholdFunction::majority(6));
        let mut src = PlantedSource::new(p.clone()).unwrap();
        let mut cfg = LearnConfig::new(1, 0.1, 0.1, 2000);
        cfg.repetitions = Some(3);
        let rep = learn(&mut src, &cfg, 42).unwrap();
        assert_eq!(rep.candidates[rep.chosen].train_error, 0.0);
        let test = generate_dataset(&p, 20_000, 777).unwrap();
        assert!(evaluate(&rep.hypothesis, &test).unwrap() <= 0.02);
    }

    #[test]
    fn degree_zero_is_majority_rule() {
        let f = LinearThresholdFunction::new(vec![1.0, 0.2, 0.1], -0.5).unwrap();
        let p = planted(3, LabelNoise::Rcn { eta: 0.2 }, f);
        let data = generate_dataset(&p, 1000, 5).unwrap();
        let plus = data[..400].iter().filter(|s| s.y > 0).count();
        let (h, _, _, _) = fit_batch(&data[..400], &MonomialBasis::new(3, 0).unwrap(), 1e-8).unwrap();
        let majority = if plus * 2 > 400 { 1 } else { -1 };
        assert_eq!(h.coeffs()[0], majority as f64);
        assert_eq!(h.predict(&[1, 1, 1]), majority);
    }

    #[test]
    fn selection_minimizes_validation_error() {
        let p = planted(6, LabelNoise::Rcn { eta: 0.15 }, LinearThresholdFunction::majority(6));
        let mut cfg = LearnConfig::new(2, 0.2, 0.1, 150);
        cfg.repetitions = Some(6);
        cfg.validation_size = Some(300);
        let rep = learn(&mut PlantedSource::new(p).unwrap(), &cfg, 1).unwrap();
        let best = rep.candidates[rep.chosen].validation_error;
        assert!(rep.candidates.iter().all(|c| c.validation_error >= best));
        assert!(rep.candidates[..rep.chosen].iter().all(|c| c.validation_error > best));
    }

    #[test]
    fn insufficient_samples() {
        let p = planted(4, LabelNoise::None, LinearThresholdFunction::majority(4));
        let data = generate_dataset(&p, 50, 0).unwrap();
        let mut cfg = LearnConfig::new(1, 0.2, 0.2, 20);
        cfg.repetitions = Some(3);
        cfg.validation_size = Some(10);
        assert!(matches!(
            learn(&mut SliceSource::new(&data), &cfg, 0),
            Err(Error::InsufficientSamples { .. })
        ));
    }
}
