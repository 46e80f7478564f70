use rand::Rng as _;

use super::operator::{cube_table, noise_operator_table};
use crate::error::{check_dim, check_unit};
use crate::hypercube::noise::noisy_copy_into;
use crate::hypercube::{decode_into, product_table, CubeFunction, ProductDistribution};
use crate::par;
use crate::rng::SeedStream;
use crate::stats::{EstimateWithCI, Mode, DEFAULT_LEVEL, ENUMERATION_CAP};
use crate::{Error, Result};

/// Cap for [`noise_sensitivity_pairwise`], which does `4^n` work.
pub const PAIRWISE_CAP: usize = 12;

fn check_boolean(v: f64) -> Result<()> {
    if v == 1.0 || v == -1.0 {
        Ok(())
    } else {
        Err(Error::NonBoolean(v))
    }
}

fn boolean_table(f: &dyn CubeFunction) -> Result<Vec<f64>> {
    let t = cube_table(f)?;
    t.iter().try_for_each(|&v| check_boolean(v))?;
    Ok(t)
}

/// `E_{x~mu}[f(x) g(x)]` for tables.
fn correlation(f: &[f64], g: &[f64], mu: &[f64]) -> f64 {
    par::sum_chunks(f.len(), par::CHUNK, |_, r| r.map(|i| mu[i] * f[i] * g[i]).sum())
}

/// Monte Carlo frequency of `f(x) != f(y)` with `x ~ mu`, `y ~ N_keep(x)`.
fn disagreement_mc(
    f: &dyn CubeFunction,
    keep: f64,
    mu: &ProductDistribution,
    samples: usize,
    seed: u64,
) -> Result<EstimateWithCI> {
    let n = f.dim();
    let seeds = SeedStream::new(seed);
    let hits = par::map_chunks(samples, par::CHUNK, |ci, r| -> Result<u64> {
        let mut rng = seeds.rng(ci as u64);
        let mut x = vec![1i8; n];
        let mut y = vec![1i8; n];
        let mut hits = 0;
        for _ in r {
            for (b, &p) in x.iter_mut().zip(mu.minus_probs()) {
                *b = if rng.random::<f64>() < p { -1 } else { 1 };
            }
            noisy_copy_into(&x, keep, mu.minus_probs(), &mut rng, &mut y);
            let (fx, fy) = (f.eval(&x), f.eval(&y));
            check_boolean(fx)?;
            check_boolean(fy)?;
            hits += u64::from(fx != fy);
        }
        Ok(hits)
    });
    let hits = hits.into_iter().sum::<Result<u64>>()?;
    Ok(EstimateWithCI::from_bernoulli(hits, samples, DEFAULT_LEVEL))
}

/// `NS_delta(f) = P_{x~mu, y~N_{1-delta}(x)}[f(x) != f(y)]`.
///
/// The exact path uses `NS = 1/2 - 1/2 E_mu[f T_{1-delta} f]` on a full table.
pub fn noise_sensitivity(
    f: &dyn CubeFunction,
    delta: f64,
    mu: &ProductDistribution,
    mode: Mode,
    seed: u64,
) -> Result<EstimateWithCI> {
    check_unit("delta", delta)?;
    check_dim(f.dim(), mu.dim())?;
    match mode.resolve(f.dim(), ENUMERATION_CAP)? {
        None => {
            let t = boolean_table(f)?;
            let smooth = noise_operator_table(&t, 1.0 - delta, mu)?;
            let stab = correlation(&t, &smooth, &mu.table());
            Ok(EstimateWithCI::exact((0.5 - 0.5 * stab).clamp(0.0, 1.0)))
        }
        Some(samples) => disagreement_mc(f, 1.0 - delta, mu, samples, seed),
    }
}

/// Noise sensitivity by enumerating every pair `(x, y)`.
pub fn noise_sensitivity_pairwise(f: &dyn CubeFunction, delta: f64, mu: &ProductDistribution) -> Result<f64> {
    check_unit("delta", delta)?;
    let n = f.dim();
    check_dim(n, mu.dim())?;
    if n > PAIRWISE_CAP {
        return Err(Error::EnumerationCap { n, cap: PAIRWISE_CAP });
    }
    let t = boolean_table(f)?;
    let px = mu.table();
    let keep = 1.0 - delta;
    Ok(par::sum_chunks(t.len(), 64, |_, r| {
        let mut x = vec![1i8; n];
        let mut acc = 0.0;
        for ix in r {
            decode_into(ix as u64, &mut x);
            let law = product_table(n, |i, v| {
                let stay = if v == x[i] { keep } else { 0.0 };
                stay + (1.0 - keep) * mu.coord_prob(i, v)
            });
            let mass: f64 = law.iter().zip(&t).filter(|(_, &fy)| fy != t[ix]).map(|(p, _)| p).sum();
            acc += px[ix] * mass;
        }
        acc
    }))
}

/// `E_{z~N_sigma} |T_{1-rho} f(z) - f(z)|`, with `T` taken over `mu = N_sigma`.
pub fn smoothing_l1_gap(
    f: &dyn CubeFunction,
    rho: f64,
    sigma: f64,
    mode: Mode,
    seed: u64,
) -> Result<EstimateWithCI> {
    check_unit("rho", rho)?;
    let n = f.dim();
    let mu = ProductDistribution::bit_flip(n, sigma)?;
    match mode.resolve(n, ENUMERATION_CAP)? {
        None => {
            let t = boolean_table(f)?;
            let smooth = noise_operator_table(&t, 1.0 - rho, &mu)?;
            let w = mu.table();
            let gap = par::sum_chunks(t.len(), par::CHUNK, |_, r| {
                r.map(|i| w[i] * (smooth[i] - t[i]).abs()).sum()
            });
            Ok(EstimateWithCI::exact(gap))
        }
        Some(samples) => {
            // For Boolean f, |Tf - f| = 1 - f Tf, so the gap is twice a disagreement rate.
            let e = disagreement_mc(f, 1.0 - rho, &mu, samples, seed)?;
            Ok(EstimateWithCI { value: 2.0 * e.value, half_width: 2.0 * e.half_width, ..e })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::{FnCube, LinearThresholdFunction};

    #[test]
    fn zero_delta_and_dictator() {
        let mu = ProductDistribution::uniform(5);
        let f = LinearThresholdFunction::new(vec![1.0, -0.4, 0.3, 2.0, 0.5], 0.2).unwrap();
        assert_eq!(noise_sensitivity(&f, 0.0, &mu, Mode::Exact, 0).unwrap().value, 0.0);
        let d = LinearThresholdFunction::dictator(5, 0).unwrap();
        for delta in [0.01, 0.1, 0.3, 0.9] {
            let ns = noise_sensitivity(&d, delta, &mu, Mode::Exact, 0).unwrap().value;
            assert!((ns - delta / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_boolean() {
        let f = FnCube::new(2, |x: &[i8]| 0.5 * x[0] as f64);
        let mu = ProductDistribution::uniform(2);
        assert!(matches!(noise_sensitivity(&f, 0.1, &mu, Mode::Exact, 0), Err(Error::NonBoolean(_))));
        assert!(matches!(
            noise_sensitivity(&f, 0.1, &mu, Mode::MonteCarlo { samples: 10 }, 0),
            Err(Error::NonBoolean(_))
        ));
    }

    #[test]
    fn table_formula_matches_pairwise() {
        let f = LinearThresholdFunction::new(vec![0.9, -1.3, 0.2, 0.6, 1.1, -0.3], -0.4).unwrap();
        let mu = ProductDistribution::new(vec![0.2, 0.6, 0.45, 0.8, 0.1, 0.35]).unwrap();
        for delta in [0.02, 0.2, 0.7] {
            let a = noise_sensitivity(&f, delta, &mu, Mode::Exact, 0).unwrap().value;
            let b = noise_sensitivity_pairwise(&f, delta, &mu).unwrap();
            assert!((a - b).abs() < 1e-13, "{a} {b}");
        }
    }

    #[test]
    fn gap_closed_form_for_dictator() {
        let d = LinearThresholdFunction::dictator(4, 0).unwrap();
        let g = smoothing_l1_gap(&d, 0.2, 0.5, Mode::Exact, 0).unwrap().value;
        assert!((g - 0.2).abs() < 1e-14);
        assert_eq!(smoothing_l1_gap(&d, 0.0, 0.3, Mode::Exact, 0).unwrap().value, 0.0);
    }

    #[test]
    fn gap_is_twice_sensitivity_under_smoothing_measure() {
        let f = LinearThresholdFunction::new(vec![1.0, 0.8, -0.6, 0.4, 0.3, 0.2, -0.1], 0.5).unwrap();
        let (rho, sigma) = (0.1, 0.25);
        let g = smoothing_l1_gap(&f, rho, sigma, Mode::Exact, 0).unwrap().value;
        let mu = ProductDistribution::bit_flip(7, sigma).unwrap();
        let ns = noise_sensitivity(&f, rho, &mu, Mode::Exact, 0).unwrap().value;
        assert!(g <= 2.0 * ns + 1e-12);
        assert!((g - 2.0 * ns).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_paths_cover_exact() {
        let f = LinearThresholdFunction::new(vec![1.0, 0.7, 0.5, -0.9, 0.3, 0.6, 0.2, -0.4], 0.1).unwrap();
        let mu = ProductDistribution::new(vec![0.3, 0.5, 0.7, 0.2, 0.4, 0.6, 0.5, 0.5]).unwrap();
        let e = noise_sensitivity(&f, 0.1, &mu, Mode::Exact, 0).unwrap().value;
        let m = noise_sensitivity(&f, 0.1, &mu, Mode::MonteCarlo { samples: 100_000 }, 9).unwrap();
        assert!(m.contains(e, 0.0));
        let e = smoothing_l1_gap(&f, 0.04, 0.05, Mode::Exact, 0).unwrap().value;
        let m = smoothing_l1_gap(&f, 0.04, 0.05, Mode::MonteCarlo { samples: 100_000 }, 9).unwrap();
        assert!(m.contains(e, 0.0));
    }
}
