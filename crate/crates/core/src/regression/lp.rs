//! Least absolute deviations by a vertex (simplex-type) method.
//!
//! A vertex of `min_c sum_j w_j |y_j - <x_j, c>|` interpolates a set `Z`
//! of rows whose feature block `X_Z` is nonsingular. With `H = X X_Z^{-1}`
//! and sign tags `s` on the other rows, the reduced costs are
//! `a = sum_{j not in Z} w_j s_j H_j`. Releasing row `Z_p` is an
//! improving edge when `|a_p| > w_{Z_p}`; the step then walks the breakpoints
//! of the piecewise-linear objective along that edge and stops at the
//! minimum, so one iteration may pass many rows.
//!
//! At a vertex with tags `s`, `u_j = w_j s_j` off `Z` and `u_Z = -a` is the
//! dual point; it is feasible exactly when no edge improves, and then
//! `y^T u` equals the primal objective.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::matrix::{dot, FeatureMatrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Options {
    /// Required duality gap, relative to `max(1, objective)`.
    pub tol: f64,
    /// Iteration cap; `None` picks one from the problem size.
    pub max_iter: Option<usize>,
    /// Recompute `X_Z^{-1}` from scratch every this many pivots.
    pub refactor_every: usize,
}

impl Default for L1Options {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: None, refactor_every: 128 }
    }
}

/// Optimality certificate: a dual-feasible `u` with `X^T u = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub primal: f64,
    /// `y^T u`, a lower bound on the optimum.
    pub dual: f64,
    /// `primal - dual`.
    pub gap: f64,
    /// `max |X^T u|`, zero up to rounding.
    pub dual_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct L1Fit {
    pub coeffs: Vec<f64>,
    pub objective: f64,
    pub certificate: Certificate,
    pub iterations: usize,
}

/// `min_c sum_j |<features_j, c> - labels_j|`.
pub fn l1_fit(features: &FeatureMatrix, labels: &[f64], tol: f64) -> Result<L1Fit> {
    let (x, y, w) = compress(features, labels)?;
    l1_fit_weighted(&x, &y, &w, L1Options { tol, ..L1Options::default() })
}

/// Merges identical `(row, label)` pairs into one weighted row.
fn compress(features: &FeatureMatrix, labels: &[f64]) -> Result<(FeatureMatrix, Vec<f64>, Vec<f64>)> {
    crate::error::check_dim(features.rows(), labels.len())?;
    let m = features.cols();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut w: Vec<f64> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let row = features.row(i);
        let mut key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
        key.push((label + 0.0).to_bits());
        match index.get(&key) {
            Some(&k) => w[k] += 1.0,
            None => {
                index.insert(key, y.len());
                data.extend_from_slice(row);
                y.push(label);
                w.push(1.0);
            }
        }
    }
    Ok((FeatureMatrix::new(y.len(), m, data)?, y, w))
}

fn validate(x: &FeatureMatrix, y: &[f64], w: &[f64], opts: &L1Options) -> Result<()> {
    if x.rows() == 0 {
        return Err(Error::Empty("L1 fit needs at least one sample"));
    }
    if x.cols() == 0 {
        return Err(Error::Empty("L1 fit needs at least one feature"));
    }
    crate::error::check_dim(x.rows(), y.len())?;
    crate::error::check_dim(x.rows(), w.len())?;
    if !(opts.tol > 0.0) {
        return Err(Error::config("tolerance must be positive"));
    }
    if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::config("weights must be positive and finite"));
    }
    if x.as_slice().iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::config("features and labels must be finite"));
    }
    Ok(())
}

/// Residuals of the weighted least-squares fit, if its normal equations are solvable.
fn least_squares_residuals(x: &FeatureMatrix, y: &[f64], w: &[f64]) -> Option<Vec<f64>> {
    let (n, m) = (x.rows(), x.cols());
    let xm = DMatrix::from_fn(n, m, |i, j| x.get(i, j) * w[i].sqrt());
    let yw = nalgebra::DVector::from_fn(n, |i, _| y[i] * w[i].sqrt());
    let normal = xm.tr_mul(&xm);
    let rhs = xm.tr_mul(&yw);
    let c = normal.cholesky()?.solve(&rhs);
    let c: Vec<f64> = c.iter().copied().collect();
    Some((0..n).map(|j| y[j] - dot(x.row(j), &c)).collect())
}

/// Picks a maximal set of independent columns and matching rows, trying
/// rows with small least-squares residual first. Returns `(rows, cols)`.
fn initial_basis(x: &FeatureMatrix, y: &[f64], w: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let m = x.cols();
    let scale = x.as_slice().iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    let eps = 1e-9 * scale;
    let mut order: Vec<usize> = (0..x.rows()).collect();
    match least_squares_residuals(x, y, w) {
        Some(res) => order.sort_by(|&a, &b| res[a].abs().total_cmp(&res[b].abs()).then(w[b].total_cmp(&w[a]))),
        None => order.sort_by(|&a, &b| w[b].total_cmp(&w[a])),
    }
    // reduced pivot rows and their pivot columns
    let mut pivots: Vec<(Vec<f64>, usize)> = Vec::new();
    let mut rows = Vec::new();
    for &i in &order {
        if pivots.len() == m {
            break;
        }
        let mut v = x.row(i).to_vec();
        for (p, col) in &pivots {
            let f = v[*col] / p[*col];
            if f != 0.0 {
                for (a, b) in v.iter_mut().zip(p) {
                    *a -= f * b;
                }
                v[*col] = 0.0;
            }
        }
        let (col, mag) = v
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bj, bv), (j, a)| if a.abs() > bv { (j, a.abs()) } else { (bj, bv) });
        if mag > eps {
            pivots.push((v, col));
            rows.push(i);
        }
    }
    let mut cols: Vec<usize> = pivots.iter().map(|(_, c)| *c).collect();
    let mut perm: Vec<usize> = (0..cols.len()).collect();
    perm.sort_by_key(|&k| cols[k]);
    let rows = perm.iter().map(|&k| rows[k]).collect();
    cols.sort_unstable();
    (rows, cols)
}

struct Solver<'a> {
    x: &'a FeatureMatrix,
    y: Vec<f64>,
    w: &'a [f64],
    n: usize,
    m: usize,
    z: Vec<usize>,
    pos: Vec<Option<usize>>,
    tags: Vec<f64>,
    // X_Z^{-1}, row-major
    binv: Vec<f64>,
    c: Vec<f64>,
    r: Vec<f64>,
    // sum over rows outside Z of w_j s_j x_j; reduced costs are a = g X_Z^{-1}
    g: Vec<f64>,
    a: Vec<f64>,
    col: Vec<f64>,
    bcol: Vec<f64>,
}

fn invert(x: &FeatureMatrix, z: &[usize]) -> Option<Vec<f64>> {
    let m = x.cols();
    let xz = DMatrix::from_fn(m, m, |i, j| x.get(z[i], j));
    let inv = xz.try_inverse()?;
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            out[i * m + j] = inv[(i, j)];
        }
    }
    Some(out)
}

#[inline]
fn axpy(out: &mut [f64], f: f64, v: &[f64]) {
    for (o, x) in out.iter_mut().zip(v) {
        *o += f * x;
    }
}

impl<'a> Solver<'a> {
    fn new(x: &'a FeatureMatrix, y: Vec<f64>, w: &'a [f64], z: Vec<usize>) -> Result<Self> {
        let (n, m) = (x.rows(), x.cols());
        let mut pos = vec![None; n];
        for (p, &j) in z.iter().enumerate() {
            pos[j] = Some(p);
        }
        let mut s = Self {
            x,
            y,
            w,
            n,
            m,
            z,
            pos,
            tags: vec![1.0; n],
            binv: vec![0.0; m * m],
            c: vec![0.0; m],
            r: vec![0.0; n],
            g: vec![0.0; m],
            a: vec![0.0; m],
            col: vec![0.0; n],
            bcol: vec![0.0; m],
        };
        s.refactor()?;
        Ok(s)
    }

    fn refactor(&mut self) -> Result<()> {
        self.binv = invert(self.x, &self.z).ok_or_else(|| Error::config("interpolation block became singular"))?;
        self.solve_point();
        self.recompute_prices();
        Ok(())
    }

    /// `c = X_Z^{-1} y_Z` and residuals from the current inverse.
    fn solve_point(&mut self) {
        let m = self.m;
        for k in 0..m {
            self.c[k] = (0..m).map(|q| self.binv[k * m + q] * self.y[self.z[q]]).sum();
        }
        for j in 0..self.n {
            self.r[j] = if self.pos[j].is_some() { 0.0 } else { self.y[j] - dot(self.x.row(j), &self.c) };
            if self.pos[j].is_none() && self.r[j].abs() > 1e-9 {
                self.tags[j] = self.r[j].signum();
            }
        }
    }

    fn recompute_prices(&mut self) {
        self.g.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n {
            if self.pos[j].is_none() {
                axpy(&mut self.g, self.w[j] * self.tags[j], self.x.row(j));
            }
        }
    }

    fn objective(&self) -> f64 {
        self.r.iter().zip(self.w).map(|(r, w)| w * r.abs()).sum()
    }

    /// `a = g X_Z^{-1}`.
    fn update_reduced_costs(&mut self) {
        let m = self.m;
        self.a.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..m {
            let gk = self.g[k];
            if gk != 0.0 {
                axpy(&mut self.a, gk, &self.binv[k * m..(k + 1) * m]);
            }
        }
    }

    /// Chooses the released position, or `None` at optimality.
    fn price(&mut self, tol: f64, bland: bool) -> Option<usize> {
        self.update_reduced_costs();
        let mut best: Option<(usize, f64)> = None;
        for p in 0..self.m {
            let v = self.a[p].abs() - self.w[self.z[p]];
            if v > tol {
                let better = match best {
                    None => true,
                    Some((bp, bv)) => {
                        if bland {
                            self.z[p] < self.z[bp]
                        } else {
                            v > bv
                        }
                    }
                };
                if better {
                    best = Some((p, v));
                }
            }
        }
        best.map(|(p, _)| p)
    }

    /// One edge move releasing position `p`. Returns the step length.
    fn step(&mut self, p: usize, bland: bool) -> Result<f64> {
        let m = self.m;
        let sigma = self.a[p].signum();
        for k in 0..m {
            self.bcol[k] = self.binv[k * m + p];
        }
        // column p of X X_Z^{-1}
        for j in 0..self.n {
            self.col[j] = if self.pos[j].is_some() { 0.0 } else { dot(self.x.row(j), &self.bcol) };
        }
        let mut slope = self.w[self.z[p]] - self.a[p].abs();
        let mut cand: Vec<(f64, f64, usize)> = Vec::new();
        for j in 0..self.n {
            let hjp = self.col[j];
            if self.pos[j].is_none() && self.tags[j] * sigma * hjp > 1e-11 {
                let t = (self.tags[j] * self.r[j]).max(0.0) / hjp.abs();
                cand.push((t, hjp.abs(), j));
            }
        }
        if bland {
            cand.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        } else {
            cand.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
        }
        let mut enter = None;
        for (k, &(_, hj, j)) in cand.iter().enumerate() {
            slope += 2.0 * self.w[j] * hj;
            if slope >= 0.0 {
                enter = Some(k);
                break;
            }
        }
        let k = enter.ok_or_else(|| Error::config("objective unbounded along an edge (numerical breakdown)"))?;
        let (t, _, kj) = cand[k];
        let leave = self.z[p];

        let ts = t * sigma;
        if ts != 0.0 {
            axpy(&mut self.c, ts, &self.bcol);
            for j in 0..self.n {
                if self.pos[j].is_none() {
                    self.r[j] -= ts * self.col[j];
                }
            }
        }
        self.r[kj] = 0.0;
        self.r[leave] = -ts;

        for &(_, _, j) in &cand[..k] {
            let f = -2.0 * self.w[j] * self.tags[j];
            axpy(&mut self.g, f, self.x.row(j));
            self.tags[j] = -self.tags[j];
        }
        axpy(&mut self.g, -self.w[kj] * self.tags[kj], self.x.row(kj));
        self.tags[leave] = -sigma;
        axpy(&mut self.g, self.w[leave] * self.tags[leave], self.x.row(leave));

        // X_Z^{-1} after replacing row p: column p scaled by 1/h_p, others eliminated
        let mut hk = vec![0.0; m];
        let xk = self.x.row(kj);
        for (q, &xv) in xk.iter().enumerate() {
            if xv != 0.0 {
                axpy(&mut hk, xv, &self.binv[q * m..(q + 1) * m]);
            }
        }
        let hp = hk[p];
        for row in self.binv.chunks_mut(m) {
            let f = row[p] / hp;
            if f != 0.0 {
                axpy(row, -f, &hk);
            }
            row[p] = f;
        }

        self.pos[leave] = None;
        self.pos[kj] = Some(p);
        self.z[p] = kj;
        Ok(t)
    }

    fn coefficients(&self) -> Vec<f64> {
        self.c.clone()
    }
}

struct Run {
    iterations: usize,
    max_iter: usize,
    refactor_every: usize,
    price_tol: f64,
}

impl Run {
    fn optimize(&mut self, s: &mut Solver) -> Result<()> {
        let mut since_refactor = 0;
        let mut degenerate_run = 0;
        let mut bland = false;
        loop {
            match s.price(self.price_tol, bland) {
                Some(p) => {
                    if self.iterations >= self.max_iter {
                        return Err(Error::SolverNonConvergence {
                            iterations: self.iterations,
                            objective: s.objective(),
                            incumbent: s.coefficients(),
                        });
                    }
                    let t = s.step(p, bland)?;
                    self.iterations += 1;
                    since_refactor += 1;
                    if t <= 1e-13 {
                        degenerate_run += 1;
                        if degenerate_run > 2 * s.m + 10 {
                            bland = true;
                        }
                    } else {
                        degenerate_run = 0;
                        bland = false;
                    }
                    if since_refactor >= self.refactor_every {
                        s.refactor()?;
                        since_refactor = 0;
                    }
                }
                None if since_refactor > 0 => {
                    s.refactor()?;
                    since_refactor = 0;
                }
                None => return Ok(()),
            }
        }
    }
}

fn with_incumbent(e: Error, expand: &dyn Fn(&[f64]) -> Vec<f64>) -> Error {
    match e {
        Error::SolverNonConvergence { iterations, objective, incumbent } => {
            Error::SolverNonConvergence { iterations, objective, incumbent: expand(&incumbent) }
        }
        e => e,
    }
}

/// Weighted problem `min_c sum_j w_j |y_j - <x_j, c>|`.
pub fn l1_fit_weighted(x: &FeatureMatrix, y: &[f64], w: &[f64], opts: L1Options) -> Result<L1Fit> {
    validate(x, y, w, &opts)?;
    let (rows, cols) = initial_basis(x, y, w);
    let full_m = x.cols();
    let reduced;
    let xr = if cols.len() == full_m {
        x
    } else {
        reduced = x.select_columns(&cols);
        &reduced
    };
    let expand = |c: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; full_m];
        for (k, &j) in cols.iter().enumerate() {
            out[j] = c[k];
        }
        out
    };
    let n = x.rows();
    let wsum: f64 = w.iter().sum();
    let price_tol = 1e-11 * wsum.max(1.0);
    let max_iter = opts.max_iter.unwrap_or(50 * (n + cols.len()) + 1000);
    let refactor_every = opts.refactor_every.max(1);

    // First pass on labels perturbed by ~1e-8, second pass on the true
    // labels from the basis and tags the first pass ended with.
    let scale = y.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut rng = crate::rng::SeedStream::new(0x11_f1).rng(0);
    let perturbed: Vec<f64> = y.iter().map(|v| v + 1e-8 * scale * rng.random_range(-1.0..1.0)).collect();
    let mut s = Solver::new(xr, perturbed, w, rows)?;
    let mut run = Run { iterations: 0, max_iter, refactor_every, price_tol };
    run.optimize(&mut s).map_err(|e| with_incumbent(e, &expand))?;
    s.y = y.to_vec();
    s.solve_point();
    s.recompute_prices();
    run.optimize(&mut s).map_err(|e| with_incumbent(e, &expand))?;
    let iterations = run.iterations;

    let coeffs = s.coefficients();
    let cert = certificate(xr, y, w, &s);
    let tol = opts.tol * cert.primal.abs().max(1.0);
    if !(cert.gap <= tol) {
        return Err(Error::SolverNonConvergence { iterations, objective: cert.primal, incumbent: expand(&coeffs) });
    }
    Ok(L1Fit { coeffs: expand(&coeffs), objective: cert.primal, certificate: cert, iterations })
}

fn certificate(x: &FeatureMatrix, y: &[f64], w: &[f64], s: &Solver) -> Certificate {
    let m = x.cols();
    let r: Vec<f64> = (0..x.rows()).map(|j| y[j] - dot(x.row(j), &s.c)).collect();
    let primal: f64 = r.iter().zip(w).map(|(r, w)| w * r.abs()).sum();
    let mut u = vec![0.0; x.rows()];
    let mut g = vec![0.0; m];
    for j in 0..x.rows() {
        if s.pos[j].is_none() {
            let tag = if r[j].abs() > 1e-9 { r[j].signum() } else { s.tags[j] };
            u[j] = w[j] * tag;
            for (gk, xv) in g.iter_mut().zip(x.row(j)) {
                *gk += u[j] * xv;
            }
        }
    }
    // X_Z^T u_Z = -g
    for p in 0..m {
        let ap: f64 = (0..m).map(|k| g[k] * s.binv[k * m + p]).sum();
        u[s.z[p]] = -ap;
    }
    // scale into the dual box |u_j| <= w_j
    let excess = u.iter().zip(w).map(|(u, w)| u.abs() / w).fold(1.0f64, f64::max);
    u.iter_mut().for_each(|v| *v /= excess);
    let dual: f64 = u.iter().zip(y).map(|(u, y)| u * y).sum();
    let mut xtu = vec![0.0; m];
    for (j, uj) in u.iter().enumerate() {
        for (t, xv) in xtu.iter_mut().zip(x.row(j)) {
            *t += uj * xv;
        }
    }
    let dual_residual = xtu.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Certificate { primal, dual, gap: primal - dual, dual_residual }
}
