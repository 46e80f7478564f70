use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::config::Profile;
use super::record::LemmaRow;
use crate::analysis::{noise_sensitivity, smoothing_l1_gap};
use crate::approx::{
    berry_esseen_gap, conditional_uniformity_chi2, conditional_uniformity_exact, exp_neg_approx, rerandomize_law,
    subexp_mgf_bound, subexp_moment_bound, subexp_moment_check, taylor_exp, tilting_second_moment, DiscreteLaw,
    TailProfile,
};
use crate::hypercube::{
    noisy_copy_law, subexp_tail_probe, BitVector, Directions, LinearThresholdFunction, Marginal, ProductDistribution,
    TailProbeConfig,
};
use crate::rng::{Rng, SeedStream};
use crate::stats::Mode;
use crate::structure::{
    case2_sign_agreement, critical_index, decompose, geometric_tail_bound, regular_subsample_check, regularity,
    tail_concentration_check, Case, DecompositionBudget, LogArgument, TailCheckConfig,
};
use crate::{par, Error, Result};

/// Check ids, in suite order.
pub const LEMMA_IDS: [&str; 13] = [
    "noise-sensitivity",
    "operator-gap",
    "rerandomization",
    "critical-index",
    "regular-subsample",
    "tail-concentration",
    "head-dominance",
    "exp-approx",
    "taylor-remainder",
    "tilting-moment",
    "berry-esseen",
    "subexp-moments",
    "subexp-tail",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    All,
    Ids(Vec<String>),
}

impl Selector {
    fn resolve(&self) -> Result<Vec<usize>> {
        match self {
            Selector::All => Ok((0..LEMMA_IDS.len()).collect()),
            Selector::Ids(ids) => {
                let mut out = Vec::new();
                for id in ids {
                    let i = LEMMA_IDS.iter().position(|l| l == id).ok_or_else(|| Error::UnknownCheck(id.clone()))?;
                    if !out.contains(&i) {
                        out.push(i);
                    }
                }
                out.sort_unstable();
                Ok(out)
            }
        }
    }
}

impl FromStr for Selector {
    type Err = Error;

    /// `all`, or a comma-separated list of ids.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "all" {
            return Ok(Selector::All);
        }
        let ids: Vec<String> = s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect();
        if ids.is_empty() {
            return Err(Error::config("empty check selector"));
        }
        let sel = Selector::Ids(ids);
        sel.resolve()?;
        Ok(sel)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteOptions {
    pub profile: Profile,
    pub seed: u64,
    /// Multiplies every bound; values below one act as a negative control.
    pub bound_scale: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { profile: Profile::Smoke, seed: 0, bound_scale: 1.0 }
    }
}

struct Ctx {
    factor: usize,
    seeds: SeedStream,
    scale: f64,
}

impl Ctx {
    fn row(&self, lemma: &str, check: &str, params: serde_json::Value, measured: f64, slack: f64, bound: f64) -> LemmaRow {
        LemmaRow::new(lemma, check, params, measured, slack, bound, self.scale)
    }
}

/// Runs the selected checks. Each check draws from its own seed stream, so
/// rows do not depend on which other checks ran or on scheduling.
pub fn lemma_check_suite(selector: &Selector, opts: &SuiteOptions) -> Result<Vec<LemmaRow>> {
    if !(opts.bound_scale > 0.0 && opts.bound_scale.is_finite()) {
        return Err(Error::config(format!("bound_scale = {} must be positive", opts.bound_scale)));
    }
    let ids = selector.resolve()?;
    let master = SeedStream::new(opts.seed);
    let parts = par::map(&ids, |&i| {
        let ctx = Ctx { factor: opts.profile.factor(), seeds: master.child(i as u64), scale: opts.bound_scale };
        run_one(LEMMA_IDS[i], &ctx)
    });
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}

fn run_one(id: &str, ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    match id {
        "noise-sensitivity" => noise_sensitivity_rows(ctx),
        "operator-gap" => operator_gap_rows(ctx),
        "rerandomization" => rerandomization_rows(ctx),
        "critical-index" => critical_index_rows(ctx),
        "regular-subsample" => regular_subsample_rows(ctx),
        "tail-concentration" => tail_concentration_rows(ctx),
        "head-dominance" => head_dominance_rows(ctx),
        "exp-approx" => exp_approx_rows(ctx),
        "taylor-remainder" => taylor_rows(ctx),
        "tilting-moment" => tilting_rows(ctx),
        "berry-esseen" => berry_esseen_rows(ctx),
        "subexp-moments" => subexp_moment_rows(ctx),
        "subexp-tail" => subexp_tail_rows(ctx),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

fn gaussian_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn random_ltf(rng: &mut Rng, n: usize) -> Result<LinearThresholdFunction> {
    let w = gaussian_vec(rng, n);
    let theta: f64 = StandardNormal.sample(rng);
    LinearThresholdFunction::new(w, theta)
}

fn random_bits(rng: &mut Rng, n: usize) -> BitVector {
    BitVector::new((0..n).map(|_| if rng.random::<bool>() { -1 } else { 1 }).collect()).expect("entries are signs")
}

fn noise_sensitivity_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    const N: usize = 10;
    const DELTAS: [f64; 4] = [0.25, 0.1, 0.04, 0.01];
    let count = 20 * ctx.factor;
    let per_fn = par::map_indices(count, |k| -> Result<Vec<f64>> {
        let mut rng = ctx.seeds.rng(k as u64);
        let f = random_ltf(&mut rng, N)?;
        let mu = ProductDistribution::new((0..N).map(|_| rng.random_range(0.1..=0.9)).collect())?;
        DELTAS.iter().map(|&d| Ok(noise_sensitivity(&f, d, &mu, Mode::Exact, 0)?.value)).collect()
    });
    let per_fn = per_fn.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(DELTAS
        .iter()
        .enumerate()
        .map(|(j, &d)| {
            let worst = per_fn.iter().map(|v| v[j]).fold(0.0, f64::max);
            ctx.row("noise-sensitivity", "max-over-ltfs", json!({"n": N, "delta": d, "functions": count}), worst, 0.0, 1.25 * d.sqrt())
        })
        .collect())
}

fn operator_gap_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    const N: usize = 10;
    const SIGMAS: [f64; 2] = [0.05, 0.25];
    const RHOS: [f64; 3] = [0.01, 0.04, 0.25];
    let count = 10 * ctx.factor;
    let fns = (0..count)
        .map(|k| random_ltf(&mut ctx.seeds.rng(k as u64), N))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for &sigma in &SIGMAS {
        for &rho in &RHOS {
            let gaps = par::map(&fns, |f| smoothing_l1_gap(f, rho, sigma, Mode::Exact, 0).map(|e| e.value));
            let worst = gaps.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
            rows.push(ctx.row(
                "operator-gap",
                "max-over-ltfs",
                json!({"n": N, "sigma": sigma, "rho": rho, "functions": count}),
                worst,
                0.0,
                2.5 * rho.sqrt(),
            ));
        }
    }
    Ok(rows)
}

fn rerandomization_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    const N: usize = 3;
    let params = [(0.2, 0.1), (0.2, 0.3), (0.5, 0.1), (0.5, 0.3)];
    let mut tv: f64 = 0.0;
    let mut cond: f64 = 0.0;
    for &(rho, sigma) in &params {
        let mu = ProductDistribution::bit_flip(N, sigma)?;
        for idx in 0..1u64 << N {
            let z = BitVector::from_index(idx, N);
            let a = rerandomize_law(&z, rho, sigma)?;
            let b = noisy_copy_law(&z, 1.0 - rho, &mu)?;
            tv = tv.max(0.5 * a.iter().zip(&b).map(|(p, q)| (p - q).abs()).sum::<f64>());
            cond = cond.max(conditional_uniformity_exact(&z, rho, sigma)?);
        }
    }
    let grid = json!({"n": N, "rho": [0.2, 0.5], "sigma": [0.1, 0.3]});
    let mut rows = vec![
        ctx.row("rerandomization", "law-tv", grid.clone(), tv, 0.0, 1e-12),
        ctx.row("rerandomization", "conditional-uniform-exact", grid, cond, 0.0, 1e-12),
    ];
    let draws = 20_000 * ctx.factor;
    let z = random_bits(&mut ctx.seeds.rng(0), 6);
    let r = conditional_uniformity_chi2(&z, 0.5, 0.3, draws, ctx.seeds.child(1).master())?;
    let critical = if r.dof == 0 { 0.0 } else { ChiSquared::new(r.dof as f64).map_err(|e| Error::config(e.to_string()))?.inverse_cdf(0.999) };
    rows.push(ctx.row(
        "rerandomization",
        "conditional-uniform-chi2",
        json!({"n": 6, "rho": 0.5, "sigma": 0.3, "draws": draws, "dof": r.dof, "p_value": r.p_value}),
        r.statistic,
        0.0,
        critical,
    ));
    Ok(rows)
}

/// First sorted position whose suffix is regular, straight from the definition.
fn brute_critical(u: &[f64], alpha: f64) -> Option<usize> {
    let mut m: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    m.sort_by(|a, b| b.total_cmp(a));
    (0..m.len()).find(|&i| {
        let tail = m[i..].iter().map(|v| v * v).sum::<f64>().sqrt();
        m[i] <= alpha * tail
    })
}

fn critical_index_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    let count = 100 * ctx.factor;
    let mut mismatches = 0usize;
    let mut worst_tail: f64 = 0.0;
    let mut worst_geom: f64 = 0.0;
    for k in 0..count {
        let mut rng = ctx.seeds.rng(k as u64);
        let n = rng.random_range(1..=64);
        let alpha = rng.random_range(1..=9) as f64 / 10.0;
        let decay: f64 = rng.random_range(0.3..1.0);
        let u: Vec<f64> = gaussian_vec(&mut rng, n).iter().enumerate().map(|(i, g)| g * decay.powi(i as i32)).collect();
        let rep = critical_index(&u, alpha)?;
        if rep.ell != brute_critical(&u, alpha) {
            mismatches += 1;
        }
        if rep.case == Case::RegularTail && !rep.tail_is_zero {
            let t: Vec<f64> = rep.tail.iter().map(|&i| u[i]).collect();
            worst_tail = worst_tail.max(regularity(&t)? / alpha);
        }
        let stop = rep.ell.unwrap_or(n);
        for i in 0..stop {
            for l in i + 1..=stop {
                if let Some(b) = geometric_tail_bound(&rep, i, l) {
                    let actual = rep.tail_norms.get(l).copied().unwrap_or(0.0);
                    if b > 0.0 {
                        worst_geom = worst_geom.max(actual / b);
                    }
                }
            }
        }
    }
    let p = json!({"vectors": count, "n_max": 64, "alpha": "0.1..0.9"});
    Ok(vec![
        ctx.row("critical-index", "brute-force-mismatches", p.clone(), mismatches as f64, 0.0, 0.0),
        ctx.row("critical-index", "tail-regularity-ratio", p.clone(), worst_tail, 1e-12, 1.0),
        ctx.row("critical-index", "geometric-decay-ratio", p, worst_geom, 1e-12, 1.0),
    ])
}

fn regular_subsample_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    let (n, alpha, rho_eff, delta) = (400, 0.05, 0.5, 0.01);
    let trials = 10_000 * ctx.factor;
    let r = regular_subsample_check(&vec![1.0; n], alpha, rho_eff, delta, trials, ctx.seeds.master())?;
    Ok(vec![ctx.row(
        "regular-subsample",
        "miss-rate",
        json!({"n": n, "alpha_reg": alpha, "rho_eff": rho_eff, "delta": delta, "trials": trials, "threshold": r.threshold}),
        1.0 - r.frequency,
        3.0 * r.std_err,
        delta,
    )])
}

fn tail_concentration_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    const N: usize = 50;
    let mut rng = ctx.seeds.rng(0);
    let w = gaussian_vec(&mut rng, N);
    let z = random_bits(&mut rng, N);
    let budget = DecompositionBudget::new(8, 0.1, 0.5, 0.25)?;
    let rep = decompose(&w, 0.3, &budget)?;
    let marginal = Marginal::uniform(N);
    let mut rows = Vec::new();
    for (j, arg) in [LogArgument::Four, LogArgument::Two].into_iter().enumerate() {
        let cfg = TailCheckConfig {
            rho: 0.5,
            sigma: 0.25,
            lambda: 2f64.sqrt(),
            alpha_tail: 1.0,
            eps: 0.1,
            x_draws: 100 * ctx.factor,
            y_draws: 200,
            log_arg: arg,
        };
        let r = tail_concentration_check(&w, &rep.tail, &z, &marginal, &cfg, ctx.seeds.child(j as u64).master())?;
        rows.push(ctx.row(
            "tail-concentration",
            if arg == LogArgument::Four { "bad-x-rate-log4" } else { "bad-x-rate-log2" },
            json!({"n": N, "tail_len": rep.tail.len(), "constant": r.constant, "x_draws": cfg.x_draws, "exact_inner": r.exact_inner}),
            1.0 - r.good_fraction,
            (1.0 - cfg.eps) - r.required,
            cfg.eps,
        ));
    }
    Ok(rows)
}

fn head_dominance_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    const N: usize = 12;
    let (alpha, eps, rho, sigma) = (0.3, 0.1, 0.5, 0.25);
    let w: Vec<f64> = (0..N).map(|i| 3f64.powi(-(i as i32))).collect();
    let rep = decompose(&w, alpha, &DecompositionBudget::new(8, eps, rho, sigma)?)?;
    let draws = 20 * ctx.factor;
    let probs = par::map_indices(draws, |k| -> Result<f64> {
        let mut rng = ctx.seeds.rng(k as u64);
        let z = random_bits(&mut rng, N);
        let theta = rng.random_range(-1.0..=1.0);
        Ok(case2_sign_agreement(&w, theta, rep.head_len(), rho, sigma, &z, Mode::Exact, 0)?.value)
    });
    let probs = probs.into_iter().collect::<Result<Vec<_>>>()?;
    let bad = probs.iter().filter(|&&p| p > eps).count() as f64 / draws as f64;
    Ok(vec![ctx.row(
        "head-dominance",
        "bad-z-rate",
        json!({"n": N, "alpha_reg": alpha, "head": rep.head_len(), "eps": eps, "rho": rho, "sigma": sigma, "draws": draws}),
        bad,
        0.0,
        eps,
    )])
}

fn exp_approx_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    let mut rows = Vec::new();
    for &t in &[10.0, 25.0, 50.0] {
        for &eps in &[1e-2, 1e-3] {
            let a = exp_neg_approx(t, eps)?;
            rows.push(ctx.row(
                "exp-approx",
                "sup-error",
                json!({"T": t, "eps": eps, "degree": a.degree, "coeff_exponent": a.coeff_exponent}),
                a.sup_error,
                0.0,
                eps,
            ));
        }
    }
    let hi = exp_neg_approx(50.0, 1e-3)?.degree;
    let lo = exp_neg_approx(12.5, 1e-3)?.degree;
    rows.push(ctx.row(
        "exp-approx",
        "degree-ratio",
        json!({"T": [12.5, 50.0], "eps": 1e-3, "degrees": [lo, hi]}),
        hi as f64 / lo as f64,
        0.0,
        2.5,
    ));
    Ok(rows)
}

fn taylor_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    let mut rows = Vec::new();
    for &k in &[4usize, 8, 16] {
        let p = taylor_exp(k)?;
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        // excess of the error over the Lagrange bound, with a rounding floor
        let worst = (0..=1000)
            .map(|j| -5.0 + 10.0 * j as f64 / 1000.0)
            .map(|x: f64| {
                let bound = x.abs().exp() * x.abs().powi(k as i32) / fact;
                (x.exp() - p.eval(x)).abs() - bound - 1e-14 * x.abs().exp()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        rows.push(ctx.row("taylor-remainder", "error-minus-bound", json!({"terms": k, "interval": [-5.0, 5.0]}), worst, 0.0, 0.0));
    }
    Ok(rows)
}

fn tilting_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    let mut gap: f64 = 0.0;
    for j in 0..=40 {
        gap = gap.max(tilting_second_moment(-10.0 + 0.5 * j as f64)?.quadrature_gap());
    }
    let mut rows = vec![ctx.row("tilting-moment", "quadrature-gap", json!({"b": "-10..10 step 0.5"}), gap, 0.0, 1e-8)];
    for &b in &[0.0, 1.0, -1.0, 3.0, -3.0, 5.0, -5.0] {
        let r = tilting_second_moment(b)?;
        rows.push(ctx.row("tilting-moment", "exact-vs-bound", json!({"b": b}), r.exact, 0.0, r.bound));
        rows.push(ctx.row("tilting-moment", "majorant-vs-bound", json!({"b": b}), r.majorant, 1e-14 * r.bound, r.bound));
    }
    Ok(rows)
}

fn berry_esseen_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    let two_atom = berry_esseen_gap(&[1.0], Mode::Exact, 0)?;
    let ones = berry_esseen_gap(&[1.0; 20], Mode::Exact, 0)?;
    let mut rows = vec![
        ctx.row("berry-esseen", "two-atom-gap-error", json!({"u": [1.0]}), (two_atom.gap - 0.3413).abs(), 0.0, 1e-4),
        ctx.row("berry-esseen", "all-ones-gap", json!({"n": 20}), ones.gap, 0.0, ones.bound_term),
    ];
    let count = 4 * ctx.factor;
    let ratios = par::map_indices(count, |k| -> Result<f64> {
        let u = gaussian_vec(&mut ctx.seeds.rng(k as u64), 16);
        Ok(berry_esseen_gap(&u, Mode::Exact, 0)?.ratio)
    });
    let worst = ratios.into_iter().collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    rows.push(ctx.row("berry-esseen", "gaussian-weights-ratio", json!({"n": 16, "vectors": count}), worst, 0.0, 1.0));
    Ok(rows)
}

fn subexp_moment_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    let alpha = 1.0;
    let laws = [
        ("rademacher", DiscreteLaw::rademacher()),
        ("three-atom", DiscreteLaw::new(vec![(-2.0, 0.1), (0.0, 0.6), (1.5, 0.3)])?),
    ];
    let mut rows = Vec::new();
    for (j, (name, law)) in laws.iter().enumerate() {
        let profile = TailProfile::new(law.calibrated_lambda(alpha), alpha)?;
        let moment = (1..=8u32).map(|k| law.abs_moment(k) / subexp_moment_bound(k, &profile)).fold(0.0, f64::max);
        let mgf = [0.25, 0.5, 1.0].iter().map(|&a| law.abs_mgf(a) / subexp_mgf_bound(a, &profile)).fold(0.0, f64::max);
        let p = json!({"law": name, "lambda": profile.lambda(), "alpha_tail": alpha});
        rows.push(ctx.row("subexp-moments", "moment-ratio", p.clone(), moment, 0.0, 1.0));
        rows.push(ctx.row("subexp-moments", "mgf-ratio", p.clone(), mgf, 0.0, 1.0));
        let samples = law.sample(10_000 * ctx.factor, ctx.seeds.child(j as u64).master());
        let c = subexp_moment_check(&samples, 4, &profile)?;
        rows.push(ctx.row(
            "subexp-moments",
            "sampled-4th-moment",
            json!({"law": name, "samples": samples.len()}),
            c.empirical.value,
            c.empirical.half_width,
            c.bound,
        ));
    }
    Ok(rows)
}

fn subexp_tail_rows(ctx: &Ctx) -> Result<Vec<LemmaRow>> {
    const N: usize = 20;
    let cfg = TailProbeConfig {
        lambda: 2f64.sqrt(),
        alpha_tail: 1.0,
        directions: Directions::Random(8),
        n_samples: 20_000 * ctx.factor,
        level: crate::stats::DEFAULT_LEVEL,
    };
    let r = subexp_tail_probe(&Marginal::uniform(N), &cfg, ctx.seeds.master())?;
    let worst = r.directions.iter().map(|d| d.excess - d.band).fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![ctx.row(
        "subexp-tail",
        "excess-over-band",
        json!({"n": N, "lambda": cfg.lambda, "alpha_tail": 1.0, "samples": cfg.n_samples, "directions": 8}),
        worst,
        0.0,
        0.0,
    )])
}

/// Fixed-width pass/fail table.
pub fn lemma_table(rows: &[LemmaRow]) -> String {
    let mut out = format!("{:<6} {:<20} {:<28} {:>14} {:>14}\n", "status", "lemma", "check", "measured", "bound");
    for r in rows {
        let _ = writeln!(
            out,
            "{:<6} {:<20} {:<28} {:>14.6e} {:>14.6e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.lemma,
            r.check,
            r.measured,
            r.bound
        );
    }
    out
}
