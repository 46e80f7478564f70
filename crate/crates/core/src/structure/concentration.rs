use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::check_dim;
use crate::hypercube::{decode_into, BitVector, Marginal};
use crate::par;
use crate::rng::{Rng, SeedStream};
use crate::stats::{EstimateWithCI, Mode, DEFAULT_LEVEL, ENUMERATION_CAP};
use crate::{Error, Result};

/// Largest tail enumerated exactly inside [`tail_concentration_check`].
const EXACT_TAIL: usize = 14;

/// Per-coordinate `P(y_i = -1)` for `y ~ N_{1-rho}(z)` over the base
/// measure `N_sigma`: keep `z_i` with probability `1 - rho`, else draw.
fn resample_minus(z: &[i8], rho: f64, sigma: f64) -> Vec<f64> {
    z.iter().map(|&zi| (1.0 - rho) * f64::from(u8::from(zi < 0)) + rho * sigma).collect()
}

fn draw(minus: &[f64], rng: &mut Rng, out: &mut [i8]) {
    for (b, &p) in out.iter_mut().zip(minus) {
        *b = if rng.random::<f64>() < p { -1 } else { 1 };
    }
}

fn point_prob(minus: &[f64], y: &[i8]) -> f64 {
    minus.iter().zip(y).map(|(&p, &b)| if b < 0 { p } else { 1.0 - p }).product()
}

fn check_noise(rho: f64, sigma: f64) -> Result<()> {
    for (name, v) in [("rho", rho), ("sigma", sigma)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::config(format!("{name} = {v} must lie in [0, 1]")));
        }
    }
    Ok(())
}

/// Probability over `y ~ N_{1-rho}(z)` that dropping the tail changes the
/// sign: `sign(<u_H, y_H> + <u_T, y_T> - theta) != sign(<u_H, y_H> - theta)`.
///
/// The head is the `h` largest-magnitude coordinates of `u` (ties by index).
#[allow(clippy::too_many_arguments)]
pub fn case2_sign_agreement(
    u: &[f64],
    theta: f64,
    h: usize,
    rho: f64,
    sigma: f64,
    z: &BitVector,
    mode: Mode,
    seed: u64,
) -> Result<EstimateWithCI> {
    let n = u.len();
    check_dim(n, z.len())?;
    check_noise(rho, sigma)?;
    if h == 0 || h > n {
        return Err(Error::config(format!("head size {h} must lie in 1..={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| u[b].abs().total_cmp(&u[a].abs()));
    let mut in_head = vec![false; n];
    for &i in &order[..h] {
        in_head[i] = true;
    }
    let minus = resample_minus(z.as_slice(), rho, sigma);
    let flips = |y: &[i8]| {
        let (mut head, mut tail) = (0.0, 0.0);
        for i in 0..n {
            let t = u[i] * f64::from(y[i]);
            if in_head[i] {
                head += t;
            } else {
                tail += t;
            }
        }
        (head + tail - theta >= 0.0) != (head - theta >= 0.0)
    };

    match mode.resolve(n, ENUMERATION_CAP)? {
        None => {
            let p = par::sum_chunks(1 << n, par::CHUNK, |_, r| {
                let mut y = vec![1i8; n];
                let mut acc = 0.0;
                for idx in r {
                    decode_into(idx as u64, &mut y);
                    if flips(&y) {
                        acc += point_prob(&minus, &y);
                    }
                }
                acc
            });
            Ok(EstimateWithCI::exact(p.clamp(0.0, 1.0)))
        }
        Some(samples) => {
            let seeds = SeedStream::new(seed);
            let hits: u64 = par::map_chunks(samples, par::CHUNK, |ci, r| {
                let mut rng = seeds.rng(ci as u64);
                let mut y = vec![1i8; n];
                let mut hits = 0u64;
                for _ in r {
                    draw(&minus, &mut rng, &mut y);
                    hits += u64::from(flips(&y));
                }
                hits
            })
            .into_iter()
            .sum();
            Ok(EstimateWithCI::from_bernoulli(hits, samples, DEFAULT_LEVEL))
        }
    }
}

/// Argument of the logarithm in the first term of the concentration constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogArgument {
    /// `ln(2/eps)`
    Two,
    /// `ln(4/eps)`
    Four,
}

/// `C = (1 - 2 rho sigma) lambda ln(k/eps)^{1/(1+alpha_tail)} + sqrt(2 ln(2/eps))`
/// with `k` = 2 or 4.
pub fn concentration_constant(rho: f64, sigma: f64, lambda: f64, alpha_tail: f64, eps: f64, arg: LogArgument) -> f64 {
    let k = match arg {
        LogArgument::Two => 2.0,
        LogArgument::Four => 4.0,
    };
    (1.0 - 2.0 * rho * sigma) * lambda * (k / eps).ln().powf(1.0 / (1.0 + alpha_tail)) + (2.0 * (2.0 / eps).ln()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheckConfig {
    pub rho: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub alpha_tail: f64,
    pub eps: f64,
    /// Draws of `x` from the marginal.
    pub x_draws: usize,
    /// Draws of `y` per `x` when the tail is too long to enumerate.
    pub y_draws: usize,
    pub log_arg: LogArgument,
}

impl TailCheckConfig {
    pub fn validate(&self) -> Result<()> {
        check_noise(self.rho, self.sigma)?;
        if !(self.lambda > 0.0 && self.alpha_tail > 0.0) {
            return Err(Error::config("lambda and alpha_tail must be positive"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::config(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        if self.x_draws == 0 || self.y_draws == 0 {
            return Err(Error::config("draw counts must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailCheckReport {
    pub constant: f64,
    pub tail_norm: f64,
    /// Fraction of `x` draws whose inner probability cleared `1 - eps`.
    pub good_fraction: f64,
    /// Smallest inner probability seen.
    pub min_inner: f64,
    pub exact_inner: bool,
    /// `1 - eps - 3 se` over the `x` draws.
    pub required: f64,
    pub pass: bool,
}

/// Two-level check of `|<u_T, y_T>| <= C ||u_T||_2` with `u = w . x`:
/// for at least a `1 - eps` fraction of `x` from the marginal, the event
/// holds with probability at least `1 - eps` over `y ~ N_{1-rho}(z)`.
///
/// Both levels allow three binomial standard errors of slack; the inner
/// level needs none when the tail is short enough to enumerate.
pub fn tail_concentration_check(
    w: &[f64],
    tail: &[usize],
    z: &BitVector,
    marginal: &Marginal,
    cfg: &TailCheckConfig,
    seed: u64,
) -> Result<TailCheckReport> {
    cfg.validate()?;
    let n = w.len();
    check_dim(n, z.len())?;
    check_dim(n, marginal.dim())?;
    if let Some(&bad) = tail.iter().find(|&&i| i >= n) {
        return Err(Error::config(format!("tail index {bad} out of range for n = {n}")));
    }
    let constant = concentration_constant(cfg.rho, cfg.sigma, cfg.lambda, cfg.alpha_tail, cfg.eps, cfg.log_arg);
    let wt: Vec<f64> = tail.iter().map(|&i| w[i]).collect();
    let tail_norm = wt.iter().map(|v| v * v).sum::<f64>().sqrt();
    let zt: Vec<i8> = tail.iter().map(|&i| z.as_slice()[i]).collect();
    let minus = resample_minus(&zt, cfg.rho, cfg.sigma);
    let cut = constant * tail_norm;
    let m = tail.len();
    let exact_inner = m <= EXACT_TAIL;
    let inner_slack = if exact_inner { 0.0 } else { 3.0 * (cfg.eps * (1.0 - cfg.eps) / cfg.y_draws as f64).sqrt() };

    let seeds = SeedStream::new(seed);
    let inner: Vec<f64> = par::map_indices(cfg.x_draws, |k| {
        let mut rng = seeds.rng(k as u64);
        let mut x = vec![1i8; n];
        marginal.sample_into(&mut rng, &mut x);
        let ut: Vec<f64> = tail.iter().zip(&wt).map(|(&i, &wi)| wi * f64::from(x[i])).collect();
        let inside = |y: &[i8]| ut.iter().zip(y).map(|(a, &b)| a * f64::from(b)).sum::<f64>().abs() <= cut;
        let mut y = vec![1i8; m];
        if exact_inner {
            let mut p = 0.0;
            for idx in 0..1u64 << m {
                decode_into(idx, &mut y);
                if inside(&y) {
                    p += point_prob(&minus, &y);
                }
            }
            p
        } else {
            let mut hits = 0usize;
            for _ in 0..cfg.y_draws {
                draw(&minus, &mut rng, &mut y);
                hits += usize::from(inside(&y));
            }
            hits as f64 / cfg.y_draws as f64
        }
    });

    let good = inner.iter().filter(|&&p| p >= 1.0 - cfg.eps - inner_slack - 1e-12).count();
    let good_fraction = good as f64 / cfg.x_draws as f64;
    let min_inner = inner.iter().copied().fold(1.0, f64::min);
    let required = 1.0 - cfg.eps - 3.0 * (cfg.eps * (1.0 - cfg.eps) / cfg.x_draws as f64).sqrt();
    Ok(TailCheckReport {
        constant,
        tail_norm,
        good_fraction,
        min_inner,
        exact_inner,
        required,
        pass: good_fraction >= required,
    })
}
