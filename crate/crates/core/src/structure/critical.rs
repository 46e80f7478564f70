use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    /// The tail after the head is `alpha_reg`-regular.
    RegularTail,
    /// No regular tail starts early enough; the head is the first `K` sorted coordinates.
    DominatedHead,
}

/// Critical-index analysis of a weight vector.
///
/// Positions are 0-based in sorted order: `ell = Some(i)` means the sorted
/// suffix starting at position `i` is the first regular one, so in 1-based
/// terms the critical index is `i + 1` and the head before it has `i`
/// entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalIndexReport {
    /// Original indices sorted by non-increasing magnitude, ties by index.
    pub perm: Vec<usize>,
    /// `|u|` in sorted order.
    pub magnitudes: Vec<f64>,
    /// `tail_norms[i] = sqrt(sum_{j >= i} magnitudes[j]^2)`.
    pub tail_norms: Vec<f64>,
    pub alpha_reg: f64,
    pub ell: Option<usize>,
    /// Original indices of the head.
    pub head: Vec<usize>,
    /// Original indices of the tail.
    pub tail: Vec<usize>,
    pub case: Case,
    /// The tail has no nonzero entry.
    pub tail_is_zero: bool,
}

impl CriticalIndexReport {
    pub fn head_len(&self) -> usize {
        self.head.len()
    }

    /// `||u_T||_2` for the current split.
    pub fn tail_norm(&self) -> f64 {
        self.tail_norms.get(self.head.len()).copied().unwrap_or(0.0)
    }

    fn split(mut self, h: usize, case: Case) -> Self {
        self.head = self.perm[..h].to_vec();
        self.tail = self.perm[h..].to_vec();
        self.case = case;
        self.tail_is_zero = self.magnitudes[h..].iter().all(|&m| m == 0.0);
        self
    }
}

/// Sorts `u` by magnitude, computes the tail norms and finds the first sorted
/// position `i` with `|u_i| <= alpha_reg * sigma_i`.
///
/// Zero entries satisfy the condition trivially, so a vector whose nonzero
/// prefix never turns regular gets `ell` at its first zero. The head is
/// everything before `ell` (or the whole vector when there is none).
pub fn critical_index(u: &[f64], alpha_reg: f64) -> Result<CriticalIndexReport> {
    if !(alpha_reg > 0.0 && alpha_reg <= 1.0) {
        return Err(Error::config(format!("alpha_reg = {alpha_reg} must lie in (0, 1]")));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::config("weights must be finite"));
    }
    if u.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let n = u.len();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.sort_by(|&a, &b| u[b].abs().total_cmp(&u[a].abs()));
    let magnitudes: Vec<f64> = perm.iter().map(|&i| u[i].abs()).collect();

    let mut tail_norms = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        acc += magnitudes[i] * magnitudes[i];
        tail_norms[i] = acc.sqrt();
    }
    let ell = (0..n).find(|&i| magnitudes[i] <= alpha_reg * tail_norms[i]);
    let report = CriticalIndexReport {
        perm,
        magnitudes,
        tail_norms,
        alpha_reg,
        ell,
        head: Vec::new(),
        tail: Vec::new(),
        case: Case::RegularTail,
        tail_is_zero: false,
    };
    Ok(match ell {
        Some(i) => report.split(i, Case::RegularTail),
        None => report.split(n, Case::DominatedHead),
    })
}

/// Head-size threshold `K` with the noise parameters it depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionBudget {
    pub k: usize,
    pub eps: f64,
    pub rho: f64,
    pub sigma: f64,
}

impl DecompositionBudget {
    pub fn new(k: usize, eps: f64, rho: f64, sigma: f64) -> Result<Self> {
        let b = Self { k, eps, rho, sigma };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("K must be at least 1"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::config(format!("eps = {} must lie in (0, 1)", self.eps)));
        }
        for (name, v) in [("rho", self.rho), ("sigma", self.sigma)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::config(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Splits `u` into head and tail.
///
/// With 1-based critical index `l`: if `l < K` the head is the `l - 1`
/// coordinates before it and the tail is regular; otherwise the head is the
/// top `K` coordinates (all of them when `K > n`).
pub fn decompose(u: &[f64], alpha_reg: f64, budget: &DecompositionBudget) -> Result<CriticalIndexReport> {
    budget.validate()?;
    let report = critical_index(u, alpha_reg)?;
    let n = u.len();
    Ok(match report.ell {
        Some(i) if i + 1 < budget.k => report.split(i, Case::RegularTail),
        _ => report.split(budget.k.min(n), Case::DominatedHead),
    })
}

/// `K = ceil(ln(1 + lambda)/alpha^2 + ln(1/eps) ln(1/alpha) / (rho sigma alpha^2))`,
/// the order of the head size with every hidden constant set to 1.
pub fn suggested_k(alpha_reg: f64, eps: f64, rho: f64, sigma: f64, lambda: f64) -> Result<usize> {
    if !(alpha_reg > 0.0 && alpha_reg <= 1.0) {
        return Err(Error::config(format!("alpha_reg = {alpha_reg} must lie in (0, 1]")));
    }
    DecompositionBudget::new(1, eps, rho, sigma)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::config(format!("lambda = {lambda} must be positive")));
    }
    let a2 = alpha_reg * alpha_reg;
    let k = (1.0 + lambda).ln() / a2 + (1.0 / eps).ln() * (1.0 / alpha_reg).ln() / (rho * sigma * a2);
    Ok((k.ceil() as usize).max(1))
}

/// `L = ceil(ln(1/eps)/(rho sigma)) * ceil(4 ln(1/alpha)/alpha^2) + 2 ln(c/alpha)/alpha^2`,
/// the head length beyond which the tail is at most `|u_{i_t}| / c`.
pub fn critical_threshold(alpha_reg: f64, eps: f64, rho: f64, sigma: f64, c: f64) -> f64 {
    let a2 = alpha_reg * alpha_reg;
    let t = ((1.0 / eps).ln() / (rho * sigma)).ceil();
    let gap = (4.0 / a2 * (1.0 / alpha_reg).ln()).ceil();
    t * gap + 2.0 * (c / alpha_reg).ln() / a2
}

/// Geometric-decay bound `(1 - alpha^2)^{(l - i)/2} |u_(i)| / alpha` on the
/// sorted tail norm at position `l`.
///
/// Valid when no position in `i..l` is critical, i.e. `i < l <= ell`
/// (or `l <= n` when there is no critical index); `None` otherwise.
pub fn geometric_tail_bound(report: &CriticalIndexReport, i: usize, l: usize) -> Option<f64> {
    let n = report.magnitudes.len();
    let limit = report.ell.unwrap_or(n);
    if i >= l || l > limit {
        return None;
    }
    let a = report.alpha_reg;
    Some((1.0 - a * a).powf((l - i) as f64 / 2.0) * report.magnitudes[i] / a)
}
