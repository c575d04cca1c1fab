//! Independent reference implementations used as test oracles. None of them
//! call into the library code they check.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

/// Two-pointer linear interpolation of `(ts, vs)` at increasing `grid`.
pub fn interp_oracle(ts: &[f64], vs: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut j = 0;
    grid.iter()
        .map(|&t| {
            while j + 2 < ts.len() && ts[j + 1] < t {
                j += 1;
            }
            let (ta, tb) = (ts[j], ts[j + 1]);
            (vs[j] * (tb - t) + vs[j + 1] * (t - ta)) / (tb - ta)
        })
        .collect()
}

/// Sort-based running median with windows shrunk symmetrically at the edges.
pub fn median_oracle(x: &[f64], order: usize) -> Vec<f64> {
    let n = x.len() as isize;
    let half = (order / 2) as isize;
    (0..n)
        .map(|i| {
            let mut h = half;
            while i - h < 0 || i + h >= n {
                h -= 1;
            }
            let mut w: Vec<f64> = (i - h..=i + h).map(|k| x[k as usize]).collect();
            w.sort_by(|a, b| a.partial_cmp(b).unwrap());
            w[w.len() / 2]
        })
        .collect()
}

/// Primal epsilon-SVR objective evaluated from scratch.
pub fn svr_objective(w: &[f64], b: f64, x: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> f64 {
    let mut loss = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let f: f64 = w.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + b;
        let r = (yi - f).abs() - eps;
        if r > 0.0 {
            loss += r;
        }
    }
    0.5 * w.iter().map(|v| v * v).sum::<f64>() + c * loss
}

/// Best bias for fixed `w` by trying every loss breakpoint.
fn best_bias(w: &[f64], x: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        let r = yi - w.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>();
        for b in [r - eps, r + eps] {
            let f = svr_objective(w, b, x, y, c, eps);
            if f < best.0 {
                best = (f, b);
            }
        }
    }
    best
}

/// Dense grid search over `w` (d <= 2) with exact bias, refined by zooming
/// around the best cell. Returns the smallest objective found.
pub fn svr_grid_min(x: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> f64 {
    let d = x[0].len();
    assert!(d <= 2, "grid oracle supports d <= 2");
    let zero = vec![0.0; d];
    let (f0, _) = best_bias(&zero, x, y, c, eps);
    // 1/2 |w*|^2 <= F(w*) <= F(0)
    let radius = (2.0 * f0).sqrt() + 1e-9;
    let mut center = zero;
    let mut best = f0;
    let mut half = radius;
    let steps: i32 = 60;
    for _ in 0..30 {
        let h = half / steps as f64;
        let mut next = center.clone();
        let offsets: Vec<Vec<f64>> = if d == 1 {
            (-steps..=steps).map(|i| vec![i as f64 * h]).collect()
        } else {
            (-steps..=steps)
                .flat_map(|i| (-steps..=steps).map(move |j| vec![i as f64 * h, j as f64 * h]))
                .collect()
        };
        for off in offsets {
            let w: Vec<f64> = center.iter().zip(&off).map(|(a, b)| a + b).collect();
            let (f, _) = best_bias(&w, x, y, c, eps);
            if f < best {
                best = f;
                next = w;
            }
        }
        center = next;
        half = 12.0 * h;
    }
    best
}

/// Intersection by membership counting.
pub fn intersection_oracle<T: Ord + Clone>(sets: &BTreeMap<String, BTreeSet<T>>) -> BTreeSet<T> {
    let mut counts: BTreeMap<T, usize> = BTreeMap::new();
    for s in sets.values() {
        for v in s {
            *counts.entry(v.clone()).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .filter(|(_, n)| *n == sets.len())
        .map(|(v, _)| v)
        .collect()
}

/// Welford running mean and population variance.
pub fn welford(xs: &[f64]) -> (f64, f64) {
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &x) in xs.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    (mean, m2 / xs.len() as f64)
}

/// Pearson correlation.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Moment skewness `m3 / m2^1.5` computed in two passes.
pub fn skew_oracle(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

/// Lag (in samples) maximizing the cross-correlation of `a` and `b` within
/// `max_lag`.
pub fn xcorr_peak_lag(a: &[f64], b: &[f64], max_lag: isize) -> isize {
    let n = a.len() as isize;
    let mut best = (f64::NEG_INFINITY, 0);
    for lag in -max_lag..=max_lag {
        let mut s = 0.0;
        for i in 0..n {
            let j = i + lag;
            if (0..n).contains(&j) {
                s += a[i as usize] * b[j as usize];
            }
        }
        if s > best.0 {
            best = (s, lag);
        }
    }
    best.1
}
