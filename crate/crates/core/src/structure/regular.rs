use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::par;
use crate::rng::SeedStream;
use crate::{Error, Result};

/// Smallest `alpha` with `||w||_inf <= alpha ||w||_2`.
pub fn regularity(w: &[f64]) -> Result<f64> {
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("weights must be finite"));
    }
    let inf = w.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if inf == 0.0 {
        return Err(Error::ZeroVector);
    }
    // scale first so squares cannot overflow or underflow
    let l2 = w.iter().map(|v| (v / inf).powi(2)).sum::<f64>().sqrt();
    Ok(1.0 / l2)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsampleReport {
    /// `sqrt(rho_eff - sqrt(ln(1/delta)/2) alpha) ||w||_2`.
    pub threshold: f64,
    pub frequency: f64,
    /// Binomial standard error at the target rate `1 - delta`.
    pub std_err: f64,
    /// `1 - delta - 3 std_err`.
    pub required: f64,
    pub trials: usize,
    pub pass: bool,
}

/// Draws `trials` keep-masks with per-coordinate keep probability `rho_eff`
/// and counts how often `||w . mask||_2` clears the threshold.
///
/// Fails with a configuration error when `w` is not `alpha_reg`-regular or
/// when `alpha_reg > rho_eff / sqrt(ln(1/delta)/2)`.
pub fn regular_subsample_check(
    w: &[f64],
    alpha_reg: f64,
    rho_eff: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<SubsampleReport> {
    if !(rho_eff > 0.0 && rho_eff <= 1.0) {
        return Err(Error::config(format!("rho_eff = {rho_eff} must lie in (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config(format!("delta = {delta} must lie in (0, 1)")));
    }
    if trials == 0 {
        return Err(Error::config("trials must be positive"));
    }
    let reg = regularity(w)?;
    if reg > alpha_reg * (1.0 + 1e-12) {
        return Err(Error::config(format!("w is only {reg}-regular, not {alpha_reg}-regular")));
    }
    let spread = ((1.0 / delta).ln() / 2.0).sqrt();
    if alpha_reg * spread > rho_eff {
        return Err(Error::config(format!(
            "alpha_reg = {alpha_reg} exceeds rho_eff / sqrt(ln(1/delta)/2) = {}",
            rho_eff / spread
        )));
    }
    let norm_sq: f64 = w.iter().map(|v| v * v).sum();
    let cut_sq = (rho_eff - spread * alpha_reg) * norm_sq;

    let seeds = SeedStream::new(seed);
    let hits: u64 = par::map_chunks(trials, 256, |ci, r| {
        let mut rng = seeds.rng(ci as u64);
        let mut hits = 0u64;
        for _ in r {
            let kept: f64 = w.iter().filter(|_| rng.random::<f64>() < rho_eff).map(|v| v * v).sum();
            hits += u64::from(kept >= cut_sq);
        }
        hits
    })
    .into_iter()
    .sum();

    let frequency = hits as f64 / trials as f64;
    let std_err = (delta * (1.0 - delta) / trials as f64).sqrt();
    let required = 1.0 - delta - 3.0 * std_err;
    Ok(SubsampleReport {
        threshold: cut_sq.sqrt(),
        frequency,
        std_err,
        required,
        trials,
        pass: frequency >= required,
    })
}
