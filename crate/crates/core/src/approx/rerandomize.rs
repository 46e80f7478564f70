use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::check_unit;
use crate::hypercube::BitVector;
use crate::rng::{Rng, SeedStream};
use crate::{Error, Result};

/// Largest `n` for which [`rerandomize_law`] enumerates all `8^n` mask triples.
const LAW_CAP: usize = 6;

/// One draw of `y_i = (1 - l_i) z_i + l_i (1 - m_i) + l_i m_i eps_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RerandomizedDraw {
    /// Resample mask, `Bernoulli(rho)`.
    pub l: Vec<u8>,
    /// Randomize mask, `Bernoulli(2 sigma)`.
    pub m: Vec<u8>,
    pub eps: BitVector,
    pub y: BitVector,
}

fn check_params(rho: f64, sigma: f64) -> Result<()> {
    check_unit("rho", rho)?;
    check_unit("sigma", sigma)?;
    if sigma > 0.5 {
        return Err(Error::config(format!("sigma = {sigma} exceeds 1/2; the randomize mask needs 2 sigma <= 1")));
    }
    Ok(())
}

fn assemble(z: i8, l: u8, m: u8, eps: i8) -> i8 {
    let (l, m) = (l as i8, m as i8);
    (1 - l) * z + l * (1 - m) + l * m * eps
}

pub fn rerandomize(z: &BitVector, rho: f64, sigma: f64, seed: u64) -> Result<RerandomizedDraw> {
    check_params(rho, sigma)?;
    Ok(rerandomize_with(z, rho, sigma, &mut SeedStream::new(seed).rng(0)))
}

/// Same as [`rerandomize`] with a caller-supplied generator; parameters are
/// assumed valid.
pub fn rerandomize_with(z: &BitVector, rho: f64, sigma: f64, rng: &mut Rng) -> RerandomizedDraw {
    let n = z.len();
    let mut l = Vec::with_capacity(n);
    let mut m = Vec::with_capacity(n);
    let mut eps = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for &zi in z.as_slice() {
        let li = u8::from(rng.random::<f64>() < rho);
        let mi = u8::from(rng.random::<f64>() < 2.0 * sigma);
        let ei: i8 = if rng.random::<bool>() { 1 } else { -1 };
        l.push(li);
        m.push(mi);
        eps.push(ei);
        y.push(assemble(zi, li, mi, ei));
    }
    RerandomizedDraw { l, m, eps: BitVector::from_raw(eps), y: BitVector::from_raw(y) }
}

/// Visits every `(l, m, eps)` with its probability and the resulting `y` index.
fn for_each_triple(z: &[i8], rho: f64, sigma: f64, mut f: impl FnMut(u64, u64, u64, f64)) {
    let n = z.len();
    let coord = [[1.0 - rho, rho], [1.0 - 2.0 * sigma, 2.0 * sigma]];
    for code in 0..1u64 << (3 * n) {
        let (lb, mb, eb) = (code & ((1 << n) - 1), (code >> n) & ((1 << n) - 1), code >> (2 * n));
        let mut p = 1.0;
        let mut yidx = 0u64;
        for (i, &zi) in z.iter().enumerate() {
            let li = ((lb >> i) & 1) as u8;
            let mi = ((mb >> i) & 1) as u8;
            let ei: i8 = if (eb >> i) & 1 == 1 { -1 } else { 1 };
            p *= coord[0][li as usize] * coord[1][mi as usize] * 0.5;
            if assemble(zi, li, mi, ei) < 0 {
                yidx |= 1 << i;
            }
        }
        f(lb, mb, yidx, p);
    }
}

/// Exact law of `y` over `{-1,+1}^n`, by enumerating every mask triple.
pub fn rerandomize_law(z: &BitVector, rho: f64, sigma: f64) -> Result<Vec<f64>> {
    check_params(rho, sigma)?;
    let n = z.len();
    if n > LAW_CAP {
        return Err(Error::EnumerationCap { n, cap: LAW_CAP });
    }
    let mut law = vec![0.0; 1 << n];
    for_each_triple(z.as_slice(), rho, sigma, |_, _, y, p| law[y as usize] += p);
    Ok(law)
}

/// Largest deviation from uniform of `y` on `{i : l_i m_i = 1}` conditioned
/// on `(l, m)`, over all mask pairs with positive probability.
pub fn conditional_uniformity_exact(z: &BitVector, rho: f64, sigma: f64) -> Result<f64> {
    check_params(rho, sigma)?;
    let n = z.len();
    if n > LAW_CAP {
        return Err(Error::EnumerationCap { n, cap: LAW_CAP });
    }
    // (l, m) -> (mass, law of y restricted to the randomized set)
    let mut cond: BTreeMap<(u64, u64), (f64, BTreeMap<u64, f64>)> = BTreeMap::new();
    for_each_triple(z.as_slice(), rho, sigma, |l, m, y, p| {
        let e = cond.entry((l, m)).or_default();
        e.0 += p;
        *e.1.entry(y & l & m).or_default() += p;
    });
    let mut worst = 0.0f64;
    for ((l, m), (mass, law)) in cond {
        if mass == 0.0 {
            continue;
        }
        let cells = 1u64 << (l & m).count_ones();
        let target = 1.0 / cells as f64;
        worst = worst.max(((cells - law.len() as u64) as f64) * target);
        for p in law.values() {
            worst = worst.max((p / mass - target).abs());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Mask patterns with enough draws to be tested.
    pub groups: usize,
}

/// Chi-square test that `y` restricted to `{i : l_i m_i = 1}` is uniform
/// given the randomized set. Patterns with fewer than five expected draws
/// per cell are skipped; the per-pattern statistics are pooled.
pub fn conditional_uniformity_chi2(
    z: &BitVector,
    rho: f64,
    sigma: f64,
    draws: usize,
    seed: u64,
) -> Result<ChiSquareReport> {
    check_params(rho, sigma)?;
    let n = z.len();
    if n > 16 {
        return Err(Error::EnumerationCap { n, cap: 16 });
    }
    let mut rng = SeedStream::new(seed).rng(0);
    let mut counts: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
    for _ in 0..draws {
        let d = rerandomize_with(z, rho, sigma, &mut rng);
        let mut mask = 0u64;
        let mut ybits = 0u64;
        for i in 0..n {
            if d.l[i] * d.m[i] == 1 {
                mask |= 1 << i;
                if d.y.as_slice()[i] < 0 {
                    ybits |= 1 << i;
                }
            }
        }
        *counts.entry(mask).or_default().entry(ybits).or_default() += 1;
    }
    let (mut statistic, mut dof, mut groups) = (0.0, 0usize, 0usize);
    for (mask, cells) in counts {
        let k = 1u64 << mask.count_ones();
        let total: u64 = cells.values().sum();
        if k < 2 || (total as f64) < 5.0 * k as f64 {
            continue;
        }
        let expect = total as f64 / k as f64;
        let seen: f64 = cells.values().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
        let unseen = (k - cells.len() as u64) as f64 * expect;
        statistic += seen + unseen;
        dof += (k - 1) as usize;
        groups += 1;
    }
    let p_value = if dof == 0 {
        1.0
    } else {
        let chi = ChiSquared::new(dof as f64).map_err(|e| Error::config(e.to_string()))?;
        1.0 - chi.cdf(statistic)
    };
    Ok(ChiSquareReport { statistic, dof, p_value, groups })
}
