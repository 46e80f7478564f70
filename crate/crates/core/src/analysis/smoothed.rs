use rand::Rng as _;

use super::operator::{cube_table, flip_smooth_table};
use crate::error::{check_dim, check_unit};
use crate::hypercube::{decode_into, sign, CubeFunction, LabeledSample, PlantedDataConfig};
use crate::par;
use crate::rng::SeedStream;
use crate::stats::{EstimateWithCI, Mode, DEFAULT_LEVEL, ENUMERATION_CAP};
use crate::{Error, Result};

/// Table of `E_{z~N_sigma}[sign f(x ⊙ z)]` over all `x`.
fn smoothed_sign_table(f: &dyn CubeFunction, sigma: f64) -> Result<Vec<f64>> {
    let signs: Vec<f64> = cube_table(f)?.into_iter().map(|v| sign(v) as f64).collect();
    flip_smooth_table(&signs, sigma)
}

/// `P_{(x,y) ~ data, z ~ N_sigma}[sign f(x ⊙ z) != y]`.
pub fn smoothed_error(
    f: &dyn CubeFunction,
    data: &[LabeledSample],
    sigma: f64,
    mode: Mode,
    seed: u64,
) -> Result<EstimateWithCI> {
    check_unit("sigma", sigma)?;
    if data.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let n = f.dim();
    for s in data {
        check_dim(n, s.x.len())?;
    }
    match mode.resolve(n, ENUMERATION_CAP)? {
        None => {
            let s = smoothed_sign_table(f, sigma)?;
            let total: f64 = data
                .iter()
                .map(|d| 0.5 * (1.0 - d.y as f64 * s[d.x.to_index() as usize]))
                .sum();
            Ok(EstimateWithCI::exact(total / data.len() as f64))
        }
        Some(samples) => {
            let seeds = SeedStream::new(seed);
            let hits: u64 = par::map_chunks(samples, par::CHUNK, |ci, r| {
                let mut rng = seeds.rng(ci as u64);
                let mut buf = vec![1i8; n];
                let mut hits = 0u64;
                for k in r {
                    let d = &data[k % data.len()];
                    for (b, x) in buf.iter_mut().zip(d.x.iter()) {
                        *b = if rng.random::<f64>() < sigma { -x } else { x };
                    }
                    hits += u64::from(sign(f.eval(&buf)) != d.y);
                }
                hits
            })
            .into_iter()
            .sum();
            Ok(EstimateWithCI::from_bernoulli(hits, samples, DEFAULT_LEVEL))
        }
    }
}

/// Exact `P_{(x,y) ~ D, z ~ N_sigma}[sign f(x ⊙ z) != y]` for a planted distribution `D`.
pub fn smoothed_population_error(f: &dyn CubeFunction, cfg: &PlantedDataConfig, sigma: f64) -> Result<f64> {
    cfg.validate()?;
    check_dim(cfg.n, f.dim())?;
    let s = smoothed_sign_table(f, sigma)?;
    let mu = cfg.marginal.table();
    Ok(par::sum_chunks(s.len(), par::CHUNK, |_, r| {
        let mut buf = vec![1i8; cfg.n];
        let mut acc = 0.0;
        for idx in r {
            decode_into(idx as u64, &mut buf);
            let q = cfg.flip_prob(&buf);
            let clean = cfg.planted.eval_raw(&buf) as f64;
            // P[y = +1 | x]
            let y_plus = if clean > 0.0 { 1.0 - q } else { q };
            let f_plus = 0.5 * (1.0 + s[idx]);
            acc += mu[idx] * (f_plus * (1.0 - y_plus) + (1.0 - f_plus) * y_plus);
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercube::{
        for_each_point, generate_dataset, population_error, LabelNoise, LinearThresholdFunction, Marginal,
    };

    fn planted(n: usize, eta: f64) -> PlantedDataConfig {
        PlantedDataConfig {
            n,
            marginal: Marginal::uniform(n),
            planted: LinearThresholdFunction::majority(n),
            label_noise: LabelNoise::Rcn { eta },
        }
    }

    #[test]
    fn sigma_zero_is_plain_error() {
        let cfg = planted(6, 0.2);
        let data = generate_dataset(&cfg, 400, 1).unwrap();
        let plain = data.iter().filter(|d| cfg.planted.eval_raw(d.x.as_slice()) != d.y).count() as f64 / 400.0;
        let e = smoothed_error(&cfg.planted, &data, 0.0, Mode::Exact, 0).unwrap().value;
        assert!((e - plain).abs() < 1e-15);
        let clean = generate_dataset(&planted(6, 0.0), 100, 2).unwrap();
        assert_eq!(smoothed_error(&cfg.planted, &clean, 0.0, Mode::Exact, 0).unwrap().value, 0.0);
        assert!(matches!(smoothed_error(&cfg.planted, &[], 0.1, Mode::Exact, 0), Err(Error::Empty(_))));
    }

    #[test]
    fn matches_brute_force_over_flip_patterns() {
        let cfg = planted(5, 0.1);
        let sigma = 0.1;
        let data = generate_dataset(&cfg, 60, 5).unwrap();
        let mut brute = 0.0;
        for d in &data {
            for_each_point(5, |_, z| {
                let w: f64 = z.iter().map(|&b| if b < 0 { sigma } else { 1.0 - sigma }).product();
                let xz: Vec<i8> = d.x.iter().zip(z).map(|(a, b)| a * b).collect();
                if cfg.planted.eval_raw(&xz) != d.y {
                    brute += w;
                }
            });
        }
        brute /= data.len() as f64;
        let e = smoothed_error(&cfg.planted, &data, sigma, Mode::Exact, 0).unwrap().value;
        assert!((e - brute).abs() < 1e-14);
    }

    #[test]
    fn population_versions_agree_at_sigma_zero() {
        let cfg = planted(7, 0.12);
        let h = LinearThresholdFunction::new(vec![1.0, 1.0, 1.0, 0.5, 0.5, 0.2, 0.1], 0.3).unwrap();
        let a = smoothed_population_error(&h, &cfg, 0.0).unwrap();
        let b = population_error(&h, &cfg).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn monte_carlo_agrees() {
        let cfg = planted(9, 0.1);
        let data = generate_dataset(&cfg, 300, 7).unwrap();
        let e = smoothed_error(&cfg.planted, &data, 0.05, Mode::Exact, 0).unwrap().value;
        let m = smoothed_error(&cfg.planted, &data, 0.05, Mode::MonteCarlo { samples: 300_000 }, 1).unwrap();
        assert!(m.contains(e, 0.0), "{m:?} {e}");
    }
}
