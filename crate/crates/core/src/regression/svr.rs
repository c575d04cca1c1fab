//! Linear epsilon-insensitive support vector regression.
//!
//! The training problem
//!
//! ```text
//! min_{w,b}  1/2 |w|^2 + C * sum_i max(0, |y_i - w.x_i - b| - eps)
//! ```
//!
//! is solved in its dual with sequential minimal optimization over the
//! `2n` box-constrained multipliers (second-order working-set selection,
//! lowest index wins ties), keeping `w` explicit since the kernel is linear.
//! The bias is recovered from the primal: for fixed `w` the loss is
//! piecewise linear in `b` and its minimizer set is an interval whose
//! midpoint is taken. Training stops once the duality gap falls to the
//! requested tolerance.

use serde::{Deserialize, Serialize};

use super::check_xy;
use super::scaler::ScalerParams;
use crate::config::SvrParams;
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
/// Maximal-violating-pair gap below which SMO cannot make progress.
const STALL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvrFit {
    pub w: Vec<f64>,
    pub b: f64,
    /// Dual coefficients `alpha_i - alpha*_i`, each in `[-C, C]`.
    pub beta: Vec<f64>,
    pub duality_gap: f64,
    pub objective: f64,
    pub passes: usize,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Bias minimizing the epsilon-insensitive loss for fixed residuals
/// `r_i = y_i - w.x_i`: the midpoint of the optimal interval.
fn optimal_bias(residuals: &[f64], eps: f64) -> f64 {
    let n = residuals.len();
    let mut bps: Vec<f64> = residuals
        .iter()
        .flat_map(|&r| [r - eps, r + eps])
        .collect();
    bps.sort_unstable_by(f64::total_cmp);
    0.5 * (bps[n - 1] + bps[n])
}

fn tube_loss(residuals: &[f64], b: f64, eps: f64) -> f64 {
    residuals.iter().map(|r| ((r - b).abs() - eps).max(0.0)).sum()
}

/// Primal objective `1/2 |w|^2 + C * sum of epsilon-insensitive losses`.
pub fn primal_objective(w: &[f64], b: f64, x: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> f64 {
    let loss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| ((yi - dot(w, xi) - b).abs() - eps).max(0.0))
        .sum();
    0.5 * dot(w, w) + c * loss
}

struct Smo<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    c: f64,
    eps: f64,
    alpha: Vec<f64>,
    w: Vec<f64>,
    kdiag: Vec<f64>,
}

impl Smo<'_> {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn sign(&self, t: usize) -> f64 {
        if t < self.n() {
            1.0
        } else {
            -1.0
        }
    }

    fn linear(&self, t: usize) -> f64 {
        let n = self.n();
        if t < n {
            self.eps - self.y[t]
        } else {
            self.eps + self.y[t - n]
        }
    }

    fn point(&self, t: usize) -> &[f64] {
        &self.x[t % self.n()]
    }

    fn gradients(&self) -> Vec<f64> {
        let wx: Vec<f64> = self.x.iter().map(|xi| dot(&self.w, xi)).collect();
        (0..2 * self.n())
            .map(|t| self.sign(t) * wx[t % self.n()] + self.linear(t))
            .collect()
    }

    fn in_up(&self, t: usize) -> bool {
        if t < self.n() {
            self.alpha[t] < self.c
        } else {
            self.alpha[t] > 0.0
        }
    }

    fn in_low(&self, t: usize) -> bool {
        if t < self.n() {
            self.alpha[t] > 0.0
        } else {
            self.alpha[t] < self.c
        }
    }

    /// Returns the working pair and the maximal KKT violation.
    fn select(&self, g: &[f64]) -> (Option<(usize, usize)>, f64) {
        let l = g.len();
        let mut gmax = f64::NEG_INFINITY;
        let mut i = None;
        for t in 0..l {
            if self.in_up(t) {
                let v = -self.sign(t) * g[t];
                if v > gmax {
                    gmax = v;
                    i = Some(t);
                }
            }
        }
        let Some(i) = i else {
            return (None, 0.0);
        };
        let xi = self.point(i);
        let kii = self.kdiag[i % self.n()];
        let mut gmin = f64::INFINITY;
        let mut j = None;
        let mut best = f64::INFINITY;
        for t in 0..l {
            if !self.in_low(t) {
                continue;
            }
            let v = -self.sign(t) * g[t];
            gmin = gmin.min(v);
            let diff = gmax - v;
            if diff > 0.0 {
                let kit = dot(xi, self.point(t));
                let mut a = kii + self.kdiag[t % self.n()] - 2.0 * kit;
                if a <= 0.0 {
                    a = TAU;
                }
                let score = -(diff * diff) / a;
                if score < best {
                    best = score;
                    j = Some(t);
                }
            }
        }
        (j.map(|j| (i, j)), gmax - gmin)
    }

    fn update(&mut self, i: usize, j: usize, g: &[f64]) {
        let c = self.c;
        let (old_i, old_j) = (self.alpha[i], self.alpha[j]);
        let kij = dot(self.point(i), self.point(j));
        let mut quad = self.kdiag[i % self.n()] + self.kdiag[j % self.n()] - 2.0 * kij;
        if quad <= 0.0 {
            quad = TAU;
        }
        let (mut ai, mut aj) = (old_i, old_j);
        if self.sign(i) != self.sign(j) {
            let delta = (-g[i] - g[j]) / quad;
            let diff = ai - aj;
            ai += delta;
            aj += delta;
            if diff > 0.0 {
                if aj < 0.0 {
                    aj = 0.0;
                    ai = diff;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = -diff;
            }
            if diff > 0.0 {
                if ai > c {
                    ai = c;
                    aj = c - diff;
                }
            } else if aj > c {
                aj = c;
                ai = c + diff;
            }
        } else {
            let delta = (g[i] - g[j]) / quad;
            let sum = ai + aj;
            ai -= delta;
            aj += delta;
            if sum > c {
                if ai > c {
                    ai = c;
                    aj = sum - c;
                }
            } else if aj < 0.0 {
                aj = 0.0;
                ai = sum;
            }
            if sum > c {
                if aj > c {
                    aj = c;
                    ai = sum - c;
                }
            } else if ai < 0.0 {
                ai = 0.0;
                aj = sum;
            }
        }
        self.alpha[i] = ai;
        self.alpha[j] = aj;
        let (di, dj) = (self.sign(i) * (ai - old_i), self.sign(j) * (aj - old_j));
        let (xi, xj) = (i % self.n(), j % self.n());
        for k in 0..self.w.len() {
            self.w[k] += di * self.x[xi][k] + dj * self.x[xj][k];
        }
    }

    fn residuals(&self) -> Vec<f64> {
        self.x.iter().zip(self.y).map(|(xi, yi)| yi - dot(&self.w, xi)).collect()
    }

    /// `(gap, bias, primal objective)` for the current multipliers.
    fn gap(&self) -> (f64, f64, f64) {
        let r = self.residuals();
        let b = optimal_bias(&r, self.eps);
        let ww = dot(&self.w, &self.w);
        let primal = 0.5 * ww + self.c * tube_loss(&r, b, self.eps);
        let lin: f64 = (0..self.alpha.len()).map(|t| self.linear(t) * self.alpha[t]).sum();
        let dual_min = 0.5 * ww + lin;
        (primal + dual_min, b, primal)
    }
}

/// Fits `w`, `b` on an already-standardized matrix.
pub fn fit_linear_svr(x: &[Vec<f64>], y: &[f64], params: &SvrParams) -> Result<LinearSvrFit> {
    let d = check_xy(x, y)?;
    if x.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: x.len(),
        });
    }
    if !(params.c > 0.0 && params.eps >= 0.0 && params.tol > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need C > 0, eps >= 0, tol > 0 (got C = {}, eps = {}, tol = {})",
            params.c, params.eps, params.tol
        )));
    }
    let n = x.len();
    let mut smo = Smo {
        x,
        y,
        c: params.c,
        eps: params.eps,
        alpha: vec![0.0; 2 * n],
        w: vec![0.0; d],
        kdiag: x.iter().map(|xi| dot(xi, xi)).collect(),
    };
    let pass_len = 2 * n;
    let mut iterations = 0usize;
    let mut passes = 0usize;
    loop {
        let g = smo.gradients();
        let (pair, violation) = smo.select(&g);
        let pass_done = iterations > 0 && iterations % pass_len == 0;
        if pass_done || violation < STALL || pair.is_none() {
            let (gap, b, objective) = smo.gap();
            if gap <= params.tol {
                let beta = (0..n).map(|k| smo.alpha[k] - smo.alpha[k + n]).collect();
                return Ok(LinearSvrFit {
                    w: smo.w,
                    b,
                    beta,
                    duality_gap: gap.max(0.0),
                    objective,
                    passes,
                    iterations,
                });
            }
            if pass_done {
                passes += 1;
            }
            if passes >= params.max_passes || violation < STALL || pair.is_none() {
                return Err(Error::NotConverged { gap, passes });
            }
        }
        let (i, j) = pair.expect("checked above");
        smo.update(i, j, &g);
        iterations += 1;
    }
}

/// Standardizing linear SVR: `predict(x) = w . zscore(x) + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub scaler: ScalerParams,
    pub w: Vec<f64>,
    pub b: f64,
    pub c: f64,
    pub eps: f64,
    pub duality_gap: f64,
}

impl SvrModel {
    /// Standardizes `x` and fits the linear SVR on it.
    pub fn fit(x: &[Vec<f64>], y: &[f64], params: &SvrParams) -> Result<Self> {
        check_xy(x, y)?;
        let scaler = ScalerParams::fit(x)?;
        let fit = fit_linear_svr(&scaler.transform(x), y, params)?;
        Ok(Self {
            scaler,
            w: fit.w,
            b: fit.b,
            c: params.c,
            eps: params.eps,
            duality_gap: fit.duality_gap,
        })
    }

    /// Raw (unclamped) prediction in grams.
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.w, &self.scaler.transform_row(x)) + self.b
    }
}
