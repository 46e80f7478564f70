use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::bits::BitVector;
use super::dist::{product_table, ProductDistribution};
use super::MAX_ENUMERATION;
use crate::error::{check_dim, check_unit};
use crate::rng::{Rng, SeedStream};
use crate::{Error, Result};

/// Smoothing rate `sigma` and operator correlation `rho`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NoiseRepr", into = "NoiseRepr")]
pub struct NoiseSpec {
    sigma: f64,
    rho: f64,
}

#[derive(Serialize, Deserialize)]
struct NoiseRepr {
    sigma: f64,
    rho: f64,
}

impl TryFrom<NoiseRepr> for NoiseSpec {
    type Error = Error;
    fn try_from(r: NoiseRepr) -> Result<Self> {
        NoiseSpec::new(r.sigma, r.rho)
    }
}

impl From<NoiseSpec> for NoiseRepr {
    fn from(s: NoiseSpec) -> Self {
        NoiseRepr { sigma: s.sigma, rho: s.rho }
    }
}

impl NoiseSpec {
    pub fn new(sigma: f64, rho: f64) -> Result<Self> {
        check_unit("sigma", sigma)?;
        check_unit("rho", rho)?;
        Ok(Self { sigma, rho })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// `x ⊙ z` with `z ~ N_sigma`.
pub fn flip_noise(x: &BitVector, sigma: f64, seed: u64) -> Result<BitVector> {
    check_unit("sigma", sigma)?;
    Ok(flip_noise_with(x, sigma, &mut SeedStream::new(seed).rng(0)))
}

pub fn flip_noise_with(x: &BitVector, sigma: f64, rng: &mut Rng) -> BitVector {
    let out = x
        .iter()
        .map(|b| if rng.random::<f64>() < sigma { -b } else { b })
        .collect();
    BitVector::from_raw(out)
}

/// `rho`-noisy copy of `z`: keep `z_i` with probability `rho`, else redraw from `mu_i`.
pub fn noisy_copy(z: &BitVector, rho: f64, mu: &ProductDistribution, seed: u64) -> Result<BitVector> {
    check_unit("rho", rho)?;
    check_dim(mu.dim(), z.len())?;
    Ok(noisy_copy_with(z, rho, mu, &mut SeedStream::new(seed).rng(0)))
}

pub fn noisy_copy_with(z: &BitVector, rho: f64, mu: &ProductDistribution, rng: &mut Rng) -> BitVector {
    let mut out = z.as_slice().to_vec();
    noisy_copy_into(z.as_slice(), rho, mu.minus_probs(), rng, &mut out);
    BitVector::from_raw(out)
}

#[inline]
pub(crate) fn noisy_copy_into(z: &[i8], rho: f64, minus: &[f64], rng: &mut Rng, out: &mut [i8]) {
    for i in 0..z.len() {
        out[i] = if rng.random::<f64>() < rho {
            z[i]
        } else if rng.random::<f64>() < minus[i] {
            -1
        } else {
            1
        };
    }
}

fn check_enum(n: usize) -> Result<()> {
    if n > MAX_ENUMERATION {
        Err(Error::EnumerationCap { n, cap: MAX_ENUMERATION })
    } else {
        Ok(())
    }
}

/// Exact law of [`flip_noise`] as a table over all points.
pub fn flip_law(x: &BitVector, sigma: f64) -> Result<Vec<f64>> {
    check_unit("sigma", sigma)?;
    check_enum(x.len())?;
    let xs = x.as_slice();
    Ok(product_table(x.len(), |i, v| if v == xs[i] { 1.0 - sigma } else { sigma }))
}

/// Exact law of [`noisy_copy`] as a table over all points.
pub fn noisy_copy_law(z: &BitVector, rho: f64, mu: &ProductDistribution) -> Result<Vec<f64>> {
    check_unit("rho", rho)?;
    check_dim(mu.dim(), z.len())?;
    check_enum(z.len())?;
    let zs = z.as_slice();
    Ok(product_table(z.len(), |i, v| {
        let keep = if v == zs[i] { rho } else { 0.0 };
        keep + (1.0 - rho) * mu.coord_prob(i, v)
    }))
}
