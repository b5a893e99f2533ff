//! Multivariate adaptive regression splines.
//!
//! The forward pass adds reflected hinge pairs greedily. Candidate gains are
//! evaluated against an orthonormal basis of the current model so that every
//! knot of a (parent term, variable) pair costs O(1) after one sorted sweep.
//! The backward pass deletes terms one at a time by downdating the inverse
//! Gram matrix and keeps the subset with the smallest GCV.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lstsq::min_norm_lstsq;
use crate::error::{Result, RpeError};

/// Forward pass stops once the best relative RSS reduction falls below this,
/// or once `RSS/TSS` does.
pub const FORWARD_THRESHOLD: f64 = 1e-3;

/// A new basis column whose orthogonal residual is below this fraction of its
/// norm is treated as linearly dependent and dropped.
const DEPENDENCE_TOL: f64 = 1e-7;

/// Relative floor on the orthogonalised hinge norm for a usable candidate.
const CANDIDATE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `max(0, z − knot)`
    Positive,
    /// `max(0, knot − z)`
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hinge {
    pub variable: usize,
    pub knot: f64,
    pub direction: Direction,
}

impl Hinge {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.direction {
            Direction::Positive => (x - self.knot).max(0.0),
            Direction::Negative => (self.knot - x).max(0.0),
        }
    }
}

/// Product of hinge factors; the empty product is the intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarsTerm {
    pub factors: Vec<Hinge>,
}

impl MarsTerm {
    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        self.factors.iter().map(|h| h.eval(z[h.variable])).product()
    }

    fn uses(&self, variable: usize) -> bool {
        self.factors.iter().any(|h| h.variable == variable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarsParams {
    pub max_degree: usize,
    pub max_terms: usize,
    pub gcv_penalty: f64,
}

impl Default for MarsParams {
    fn default() -> Self {
        Self {
            max_degree: 3,
            max_terms: 21,
            gcv_penalty: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarsFit {
    pub terms: Vec<MarsTerm>,
    pub coefficients: Vec<f64>,
    pub d: usize,
    /// Training RSS of the returned model.
    pub rss: f64,
    /// GCV of the returned model.
    pub gcv: f64,
    /// Number of terms and GCV at the end of the forward pass.
    pub forward_terms: usize,
    pub forward_gcv: f64,
}

impl MarsFit {
    pub fn predict(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .zip(&self.coefficients)
            .map(|(t, c)| c * t.eval(z))
            .sum()
    }
}

/// `(RSS/m) / (1 − C/m)²` with `C = k + penalty·(k − 1)`; infinite when the
/// effective parameter count reaches `m`.
pub fn gcv(rss: f64, m: usize, terms: usize, penalty: f64) -> f64 {
    let m = m as f64;
    let k = terms as f64;
    let c = k + penalty * (k - 1.0);
    if c >= m {
        return f64::INFINITY;
    }
    let shrink = 1.0 - c / m;
    rss / m / (shrink * shrink)
}

pub fn fit(params: &MarsParams, z: &DMatrix<f64>, y: &DVector<f64>) -> Result<MarsFit> {
    let (m, d) = z.shape();
    if y.len() != m {
        return Err(RpeError::DimensionMismatch(format!(
            "{m} covariate rows but {} responses",
            y.len()
        )));
    }
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|j| z.column(j).iter().copied().collect())
        .collect();
    let mut fwd = Forward::new(params, &columns, y.as_slice());
    fwd.run();
    let forward_terms = fwd.terms.len();
    let forward_gcv = gcv(fwd.rss, m, forward_terms, params.gcv_penalty);
    let Forward { terms, values, .. } = fwd;
    let keep = backward(params, &values, y)?;

    let kept_terms: Vec<MarsTerm> = keep.iter().map(|&j| terms[j].clone()).collect();
    let basis = DMatrix::from_fn(m, keep.len(), |i, c| values[keep[c]][i]);
    let coef = min_norm_lstsq(&basis, y)?;
    let rss = (y - &basis * &coef).norm_squared();
    Ok(MarsFit {
        gcv: gcv(rss, m, kept_terms.len(), params.gcv_penalty),
        terms: kept_terms,
        coefficients: coef.iter().copied().collect(),
        d,
        rss,
        forward_terms,
        forward_gcv,
    })
}

/// Sorted sweep data for hinges on one variable within one parent's support.
struct KnotCache {
    parent: usize,
    variable: usize,
    /// Support indices sorted by the variable, descending.
    order: Vec<usize>,
    /// Parent values in `order`.
    sorted_parent: Vec<f64>,
    /// Exclusive end in `order` of each group of equal values.
    group_end: Vec<usize>,
    /// Distinct support values, descending.
    knots: Vec<f64>,
    /// `‖h_t‖²` for the positive hinge at each knot.
    hinge_sq: Vec<f64>,
    /// `‖Qᵀh_t‖²` at each knot.
    projected_sq: Vec<f64>,
    /// `b·x` with the current basis projected out.
    slope: Vec<f64>,
    slope_sq: f64,
    raw_slope_sq: f64,
}

impl KnotCache {
    /// `S(k) = Σ_{x > knot_k} v_i b_i (x_i − knot_k)` for every knot, where
    /// `b` is the parent term.
    fn sweep(&self, v: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.reserve(self.knots.len());
        out.push(0.0);
        let (mut wsum, mut s, mut start) = (0.0, 0.0, 0);
        for (pair, &end) in self.knots.windows(2).zip(&self.group_end) {
            let idx = &self.order[start..end];
            let par = &self.sorted_parent[start..end];
            for (&i, &b) in idx.iter().zip(par) {
                wsum += v[i] * b;
            }
            start = end;
            s += (pair[0] - pair[1]) * wsum;
            out.push(s);
        }
    }
}

#[derive(Clone, Copy)]
enum Move {
    Pair,
    Linear,
}

struct Candidate {
    gain: f64,
    cache: usize,
    knot: usize,
    kind: Move,
}

struct Forward<'a> {
    params: &'a MarsParams,
    x: &'a [Vec<f64>],
    /// Row indices sorted by each variable, descending.
    sorted: Vec<Vec<usize>>,
    m: usize,
    terms: Vec<MarsTerm>,
    values: Vec<Vec<f64>>,
    basis: Vec<Vec<f64>>,
    resid: Vec<f64>,
    rss: f64,
    tss: f64,
    caches: Vec<KnotCache>,
    scratch: Vec<f64>,
    scratch2: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

impl<'a> Forward<'a> {
    fn new(params: &'a MarsParams, x: &'a [Vec<f64>], y: &[f64]) -> Self {
        let m = y.len();
        let mean = y.iter().sum::<f64>() / m as f64;
        let resid: Vec<f64> = y.iter().map(|v| v - mean).collect();
        let tss = dot(&resid, &resid);
        let sorted = x
            .iter()
            .map(|xv| {
                let mut order: Vec<usize> = (0..m).collect();
                order.sort_by(|&i, &j| xv[j].total_cmp(&xv[i]).then(i.cmp(&j)));
                order
            })
            .collect();
        let mut fwd = Self {
            params,
            x,
            sorted,
            m,
            terms: vec![MarsTerm { factors: vec![] }],
            values: vec![vec![1.0; m]],
            basis: vec![vec![1.0 / (m as f64).sqrt(); m]],
            resid,
            rss: tss,
            tss,
            caches: Vec::new(),
            scratch: Vec::new(),
            scratch2: Vec::new(),
        };
        fwd.open_caches(0);
        fwd
    }

    fn run(&mut self) {
        while self.terms.len() < self.params.max_terms
            && self.tss > 0.0
            && self.rss > FORWARD_THRESHOLD * self.tss
        {
            let Some(best) = self.best_candidate() else {
                break;
            };
            if best.gain < FORWARD_THRESHOLD * self.tss {
                break;
            }
            let before = self.terms.len();
            self.apply(&best);
            if self.terms.len() == before {
                break;
            }
        }
    }

    fn best_candidate(&mut self) -> Option<Candidate> {
        let room = self.params.max_terms - self.terms.len();
        let mut best: Option<Candidate> = None;
        let mut rh = std::mem::take(&mut self.scratch);
        let mut gh = std::mem::take(&mut self.scratch2);
        for (ci, c) in self.caches.iter().enumerate() {
            let nk = c.knots.len();
            if nk < 2 {
                continue;
            }
            let rg = dot(&self.resid, &c.slope);
            let slope_ok = c.slope_sq > CANDIDATE_TOL * c.raw_slope_sq;
            let linear_gain = if slope_ok { rg * rg / c.slope_sq } else { 0.0 };
            let mut consider = |gain: f64, knot: usize, kind: Move| {
                if gain.is_finite() && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Candidate {
                        gain,
                        cache: ci,
                        knot,
                        kind,
                    });
                }
            };
            if slope_ok {
                consider(linear_gain, nk - 1, Move::Linear);
            }
            if room < 2 || nk < 3 {
                continue;
            }
            c.sweep(&self.resid, &mut rh);
            if slope_ok {
                c.sweep(&c.slope, &mut gh);
            }
            for k in 1..nk - 1 {
                let hsq = c.hinge_sq[k];
                let gain = if slope_ok {
                    let ghk = gh[k];
                    let resid_sq = hsq - c.projected_sq[k] - ghk * ghk / c.slope_sq;
                    if resid_sq <= CANDIDATE_TOL * hsq {
                        continue;
                    }
                    let rht = rh[k] - rg * ghk / c.slope_sq;
                    linear_gain + rht * rht / resid_sq
                } else {
                    let resid_sq = hsq - c.projected_sq[k];
                    if resid_sq <= CANDIDATE_TOL * hsq {
                        continue;
                    }
                    rh[k] * rh[k] / resid_sq
                };
                consider(gain, k, Move::Pair);
            }
        }
        self.scratch = rh;
        self.scratch2 = gh;
        best
    }

    fn apply(&mut self, cand: &Candidate) {
        let (parent, variable, knot) = {
            let c = &self.caches[cand.cache];
            (c.parent, c.variable, c.knots[cand.knot])
        };
        let directions: &[Direction] = match cand.kind {
            Move::Pair => &[Direction::Positive, Direction::Negative],
            Move::Linear => &[Direction::Positive],
        };
        let mut added = Vec::new();
        for &direction in directions {
            let hinge = Hinge {
                variable,
                knot,
                direction,
            };
            let xv = &self.x[variable];
            let col: Vec<f64> = self.values[parent]
                .iter()
                .zip(xv)
                .map(|(b, &xi)| b * hinge.eval(xi))
                .collect();
            if self.push_basis(&col) {
                let mut factors = self.terms[parent].factors.clone();
                factors.push(hinge);
                self.terms.push(MarsTerm { factors });
                self.values.push(col);
                added.push(self.terms.len() - 1);
            }
        }
        for t in added {
            self.open_caches(t);
        }
    }

    /// Orthogonalise `col` against the basis; on success extend the basis,
    /// the residual and every cache.
    fn push_basis(&mut self, col: &[f64]) -> bool {
        let norm0 = dot(col, col).sqrt();
        if norm0 == 0.0 {
            return false;
        }
        let mut q = col.to_vec();
        for _ in 0..2 {
            for b in &self.basis {
                let c = dot(b, &q);
                axpy(-c, b, &mut q);
            }
        }
        let norm = dot(&q, &q).sqrt();
        if norm <= DEPENDENCE_TOL * norm0 {
            return false;
        }
        q.iter_mut().for_each(|v| *v /= norm);

        let c = dot(&q, &self.resid);
        axpy(-c, &q, &mut self.resid);
        self.rss = dot(&self.resid, &self.resid);

        let mut qh = std::mem::take(&mut self.scratch);
        for cache in &mut self.caches {
            let c = dot(&q, &cache.slope);
            axpy(-c, &q, &mut cache.slope);
            cache.slope_sq = dot(&cache.slope, &cache.slope);
            cache.sweep(&q, &mut qh);
            for (acc, v) in cache.projected_sq.iter_mut().zip(&qh) {
                *acc += v * v;
            }
        }
        self.scratch = qh;
        self.basis.push(q);
        true
    }

    fn open_caches(&mut self, term: usize) {
        if self.terms[term].degree() >= self.params.max_degree {
            return;
        }
        for variable in 0..self.x.len() {
            if self.terms[term].uses(variable) {
                continue;
            }
            let cache = self.build_cache(term, variable);
            self.caches.push(cache);
        }
    }

    fn build_cache(&self, parent: usize, variable: usize) -> KnotCache {
        let b = &self.values[parent];
        let xv = &self.x[variable];
        let mut order = Vec::with_capacity(self.m);
        order.extend(
            self.sorted[variable]
                .iter()
                .copied()
                .filter(|&i| b[i] != 0.0),
        );
        let sorted_parent: Vec<f64> = order.iter().map(|&i| b[i]).collect();
        let mut knots = Vec::with_capacity(order.len());
        let mut group_end = Vec::with_capacity(order.len());
        for (pos, &i) in order.iter().enumerate() {
            if knots.last() != Some(&xv[i]) {
                if !knots.is_empty() {
                    group_end.push(pos);
                }
                knots.push(xv[i]);
            }
        }
        group_end.push(order.len());

        // ‖h_t‖² by a descending sweep with nonnegative increments
        let mut hinge_sq = Vec::with_capacity(knots.len());
        hinge_sq.push(0.0);
        let (mut w, mut s1, mut s2, mut start) = (0.0, 0.0, 0.0, 0);
        for k in 1..knots.len() {
            let end = group_end[k - 1];
            for &bi in &sorted_parent[start..end] {
                w += bi * bi;
            }
            start = end;
            let delta = knots[k - 1] - knots[k];
            s2 += 2.0 * delta * s1 + delta * delta * w;
            s1 += delta * w;
            hinge_sq.push(s2);
        }

        let mut slope: Vec<f64> = b.iter().zip(xv).map(|(bi, xi)| bi * xi).collect();
        let raw_slope_sq = dot(&slope, &slope);
        for q in &self.basis {
            let c = dot(q, &slope);
            axpy(-c, q, &mut slope);
        }
        let slope_sq = dot(&slope, &slope);

        let mut cache = KnotCache {
            parent,
            variable,
            order,
            sorted_parent,
            group_end,
            projected_sq: vec![0.0; knots.len()],
            knots,
            hinge_sq,
            slope,
            slope_sq,
            raw_slope_sq,
        };
        let mut qh = Vec::new();
        for q in &self.basis {
            cache.sweep(q, &mut qh);
            for (acc, v) in cache.projected_sq.iter_mut().zip(&qh) {
                *acc += v * v;
            }
        }
        cache
    }
}

/// Backward deletion. Returns the kept term indices (intercept first).
fn backward(params: &MarsParams, values: &[Vec<f64>], y: &DVector<f64>) -> Result<Vec<usize>> {
    let k = values.len();
    let m = y.len();
    let all: Vec<usize> = (0..k).collect();
    if k == 1 {
        return Ok(all);
    }
    let basis = DMatrix::from_fn(m, k, |i, j| values[j][i]);
    let qr = basis.clone().qr();
    let r = qr.r();
    let rinv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| RpeError::Numerical("singular spline basis".into()))?;
    let mut gram_inv = &rinv * rinv.transpose();
    let mut qty = y.clone();
    qr.q_tr_mul(&mut qty);
    let mut beta = &rinv * qty.rows(0, k);
    let mut rss = (y - &basis * &beta).norm_squared();

    let mut active = all.clone();
    let mut best = (gcv(rss, m, k, params.gcv_penalty), active.clone());
    while active.len() > 1 {
        // the intercept sits at position 0 and is never removed
        let (pos, cost) = (1..active.len())
            .map(|j| (j, beta[j] * beta[j] / gram_inv[(j, j)]))
            .fold(
                (0, f64::INFINITY),
                |acc, c| if c.1 < acc.1 { c } else { acc },
            );
        if pos == 0 {
            break;
        }
        rss += cost;
        let gjj = gram_inv[(pos, pos)];
        let g = gram_inv.column(pos).into_owned().remove_row(pos);
        let bj = beta[pos];
        gram_inv = gram_inv.remove_row(pos).remove_column(pos) - &g * g.transpose() / gjj;
        beta = beta.remove_row(pos) - &g * (bj / gjj);
        active.remove(pos);
        let score = gcv(rss, m, active.len(), params.gcv_penalty);
        if score <= best.0 {
            best = (score, active.clone());
        }
    }
    Ok(best.1)
}
