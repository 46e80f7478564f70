use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::bits::BitVector;
use crate::error::{check_dim, check_unit};
use crate::par;
use crate::rng::{Rng, SeedStream};
use crate::{Error, Result};

/// Independent coordinates; `minus_probs[i]` is the probability that
/// coordinate `i` equals `-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductDistribution {
    minus_probs: Vec<f64>,
}

impl ProductDistribution {
    pub fn new(minus_probs: Vec<f64>) -> Result<Self> {
        for &p in &minus_probs {
            check_unit("coordinate probability", p)?;
        }
        Ok(Self { minus_probs })
    }

    pub fn uniform(n: usize) -> Self {
        Self { minus_probs: vec![0.5; n] }
    }

    /// The bit-flip law `N_sigma`: each coordinate is `-1` with probability `sigma`.
    pub fn bit_flip(n: usize, sigma: f64) -> Result<Self> {
        check_unit("sigma", sigma)?;
        Ok(Self { minus_probs: vec![sigma; n] })
    }

    pub fn dim(&self) -> usize {
        self.minus_probs.len()
    }

    pub fn minus_probs(&self) -> &[f64] {
        &self.minus_probs
    }

    /// Probability of value `v` in coordinate `i`.
    #[inline]
    pub fn coord_prob(&self, i: usize, v: i8) -> f64 {
        if v < 0 {
            self.minus_probs[i]
        } else {
            1.0 - self.minus_probs[i]
        }
    }

    /// `E[x_i] = 1 - 2 p_i`.
    pub fn mean(&self, i: usize) -> f64 {
        1.0 - 2.0 * self.minus_probs[i]
    }

    pub fn prob(&self, x: &[i8]) -> f64 {
        x.iter().enumerate().map(|(i, &v)| self.coord_prob(i, v)).product()
    }

    pub fn sample(&self, rng: &mut Rng) -> BitVector {
        let mut out = vec![1i8; self.dim()];
        self.sample_into(rng, &mut out);
        BitVector::from_raw(out)
    }

    pub(crate) fn sample_into(&self, rng: &mut Rng, out: &mut [i8]) {
        for (b, &p) in out.iter_mut().zip(&self.minus_probs) {
            *b = if rng.random::<f64>() < p { -1 } else { 1 };
        }
    }

    /// Probabilities of all `2^n` points in enumeration order.
    pub fn table(&self) -> Vec<f64> {
        product_table(self.dim(), |i, v| self.coord_prob(i, v))
    }
}

/// Table of `prod_i coord(i, x_i)` over all points, built by doubling.
pub fn product_table(n: usize, coord: impl Fn(usize, i8) -> f64) -> Vec<f64> {
    let mut t = Vec::with_capacity(1 << n);
    t.push(1.0);
    for i in 0..n {
        let plus = coord(i, 1);
        let minus = coord(i, -1);
        let half = t.len();
        t.extend_from_within(..);
        for v in &mut t[..half] {
            *v *= plus;
        }
        for v in &mut t[half..] {
            *v *= minus;
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub dist: ProductDistribution,
}

/// Marginal law of the examples: a product distribution or a finite mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Marginal {
    Product(ProductDistribution),
    Mixture { components: Vec<MixtureComponent> },
}

impl Marginal {
    pub fn uniform(n: usize) -> Self {
        Marginal::Product(ProductDistribution::uniform(n))
    }

    pub fn mixture(components: Vec<(f64, ProductDistribution)>) -> Result<Self> {
        let m = Marginal::Mixture {
            components: components
                .into_iter()
                .map(|(weight, dist)| MixtureComponent { weight, dist })
                .collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Marginal::Product(p) => {
                for &q in p.minus_probs() {
                    check_unit("coordinate probability", q)?;
                }
                Ok(())
            }
            Marginal::Mixture { components } => {
                let first = components
                    .first()
                    .ok_or_else(|| Error::config("mixture has no components"))?;
                let mut total = 0.0;
                for c in components {
                    check_dim(first.dist.dim(), c.dist.dim())?;
                    if !(c.weight >= 0.0) {
                        return Err(Error::config(format!("negative mixture weight {}", c.weight)));
                    }
                    for &q in c.dist.minus_probs() {
                        check_unit("coordinate probability", q)?;
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::config(format!("mixture weights sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Marginal::Product(p) => p.dim(),
            Marginal::Mixture { components } => components.first().map_or(0, |c| c.dist.dim()),
        }
    }

    pub fn prob(&self, x: &[i8]) -> f64 {
        match self {
            Marginal::Product(p) => p.prob(x),
            Marginal::Mixture { components } => {
                components.iter().map(|c| c.weight * c.dist.prob(x)).sum()
            }
        }
    }

    /// `E[x_i]`.
    pub fn mean(&self, i: usize) -> f64 {
        match self {
            Marginal::Product(p) => p.mean(i),
            Marginal::Mixture { components } => {
                components.iter().map(|c| c.weight * c.dist.mean(i)).sum()
            }
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> BitVector {
        let mut out = vec![1i8; self.dim()];
        self.sample_into(rng, &mut out);
        BitVector::from_raw(out)
    }

    pub(crate) fn sample_into(&self, rng: &mut Rng, out: &mut [i8]) {
        match self {
            Marginal::Product(p) => p.sample_into(rng, out),
            Marginal::Mixture { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = components.len() - 1;
                for (k, c) in components.iter().enumerate() {
                    acc += c.weight;
                    if u < acc {
                        pick = k;
                        break;
                    }
                }
                components[pick].dist.sample_into(rng, out);
            }
        }
    }

    /// Probabilities of all `2^n` points in enumeration order.
    pub fn table(&self) -> Vec<f64> {
        match self {
            Marginal::Product(p) => p.table(),
            Marginal::Mixture { components } => {
                let mut out = vec![0.0; 1 << self.dim()];
                for c in components {
                    for (o, t) in out.iter_mut().zip(c.dist.table()) {
                        *o += c.weight * t;
                    }
                }
                out
            }
        }
    }
}

impl From<ProductDistribution> for Marginal {
    fn from(p: ProductDistribution) -> Self {
        Marginal::Product(p)
    }
}

/// `count` i.i.d. draws from `dist`, reproducible under `seed`.
pub fn sample_marginal(dist: &Marginal, count: usize, seed: u64) -> Result<Vec<BitVector>> {
    if count == 0 {
        return Err(Error::config("sample count must be positive"));
    }
    dist.validate()?;
    let seeds = SeedStream::new(seed);
    let chunks = par::map_chunks(count, par::CHUNK, |ci, r| {
        let mut rng = seeds.rng(ci as u64);
        r.map(|_| dist.sample(&mut rng)).collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}
