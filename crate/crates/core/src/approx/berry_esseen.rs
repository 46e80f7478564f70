use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::par;
use crate::rng::SeedStream;
use crate::stats::{phi, Method, Mode, DEFAULT_LEVEL};
use crate::{Error, Result};

/// Largest `n` whose Rademacher sum is enumerated exactly.
pub const EXACT_CAP: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseenReport {
    /// `sup_x |F(x) - Phi(x)|` for `S = <u, eps> / ||u||_2`.
    pub gap: f64,
    /// `||u||_3^3 / ||u||_2^3`.
    pub bound_term: f64,
    /// `gap / bound_term`.
    pub ratio: f64,
    pub method: Method,
    /// DKW half-width at the default level; zero when exact.
    pub band: f64,
    pub n_samples: usize,
}

/// Sorted atoms `(value, mass)` of `sum_i u_i eps_i`, equal values merged.
fn atoms(u: &[f64]) -> Vec<(f64, f64)> {
    let mut cur = vec![(0.0, 1.0)];
    for &ui in u {
        let a = ui.abs();
        if a == 0.0 {
            continue;
        }
        let lo = cur.iter().map(|&(v, p)| (v - a, 0.5 * p));
        let hi = cur.iter().map(|&(v, p)| (v + a, 0.5 * p));
        let mut next: Vec<(f64, f64)> = Vec::with_capacity(2 * cur.len());
        let mut lo = lo.peekable();
        let mut hi = hi.peekable();
        loop {
            let take = match (lo.peek(), hi.peek()) {
                (Some(x), Some(y)) => {
                    if x.0 <= y.0 {
                        lo.next()
                    } else {
                        hi.next()
                    }
                }
                (Some(_), None) => lo.next(),
                (None, Some(_)) => hi.next(),
                (None, None) => break,
            };
            let Some((v, p)) = take else { break };
            match next.last_mut() {
                Some(last) if last.0 == v => last.1 += p,
                _ => next.push((v, p)),
            }
        }
        cur = next;
    }
    cur
}

/// Sup distance between a step CDF with the given sorted atoms and `Phi`,
/// checked on both sides of every jump.
fn sup_distance(atoms: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut below = 0.0;
    let mut gap = 0.0f64;
    for (x, p) in atoms {
        let f = phi(x);
        gap = gap.max((below - f).abs());
        below += p;
        gap = gap.max((below.min(1.0) - f).abs());
    }
    gap
}

/// Kolmogorov distance between the normalized Rademacher sum
/// `<u, eps> / ||u||_2` and the standard normal.
///
/// Exact by subset-sum enumeration when the mode resolves to exact (up to
/// [`EXACT_CAP`] nonzero coordinates); otherwise from the empirical CDF of
/// Monte Carlo draws with a DKW band.
pub fn berry_esseen_gap(u: &[f64], mode: Mode, seed: u64) -> Result<BerryEsseenReport> {
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("weights must be finite"));
    }
    let scale = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::ZeroVector);
    }
    let v: Vec<f64> = u.iter().map(|x| x / scale).filter(|x| *x != 0.0).collect();
    let l2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let l3 = v.iter().map(|x| x.abs().powi(3)).sum::<f64>();
    let bound_term = l3 / (l2 * l2 * l2);
    let v: Vec<f64> = v.iter().map(|x| x / l2).collect();

    let (gap, method, band, n_samples) = match mode.resolve(v.len(), EXACT_CAP)? {
        None => (sup_distance(atoms(&v).into_iter()), Method::Exact, 0.0, 0),
        Some(samples) => {
            let seeds = SeedStream::new(seed);
            let mut draws: Vec<f64> = par::map_chunks(samples, par::CHUNK, |ci, r| {
                let mut rng = seeds.rng(ci as u64);
                r.map(|_| v.iter().map(|&x| if rng.random::<bool>() { x } else { -x }).sum::<f64>())
                    .collect::<Vec<f64>>()
            })
            .into_iter()
            .flatten()
            .collect();
            par::sort_floats(&mut draws);
            let p = 1.0 / samples as f64;
            let gap = sup_distance(draws.iter().map(|&x| (x, p)));
            let band = ((2.0 / (1.0 - DEFAULT_LEVEL)).ln() / (2.0 * samples as f64)).sqrt();
            (gap, Method::MonteCarlo, band, samples)
        }
    };
    Ok(BerryEsseenReport { gap, bound_term, ratio: gap / bound_term, method, band, n_samples })
}
