//! Sliding-window statistics of a bite's IMU matrix, aggregated into four
//! per-bite features.

use crate::config::StatisticalConfig;
use crate::error::{Error, Result};
use crate::model::{Channel, ImuSample, ImuStream};
use crate::stats::{population_variance, skewness};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    /// Gyroscope energy: sum of squared gyro values over the window.
    pub energy: f64,
    /// Total variance: sum of the six per-channel variances.
    pub variance: f64,
    /// Range of `gy`.
    pub gy_range: f64,
    /// Histogram entropy of `az`, in nats.
    pub az_entropy: f64,
}

/// `(window, step)` lengths in samples for a stream sampled at `fs`.
pub fn window_lengths(fs: f64, window_s: f64, step_s: f64) -> (usize, usize) {
    let w = ((window_s * fs).round() as usize).max(1);
    let step = ((step_s * fs).round() as usize).max(1);
    (w, step)
}

/// Start offsets of full windows over `n` samples; a single whole-stream
/// window when the stream is shorter than one window.
pub fn window_starts(n: usize, w: usize, step: usize) -> impl Iterator<Item = (usize, usize)> {
    let (count, w) = if n < w { (1, n) } else { ((n - w) / step + 1, w) };
    (0..count).map(move |k| (k * step, k * step + w))
}

/// Shannon entropy (nats) of a `bins`-bin histogram over the min–max range.
pub fn histogram_entropy(xs: &[f64], bins: usize) -> f64 {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if xs.is_empty() || bins == 0 || !(hi > lo) {
        return 0.0;
    }
    let mut counts = vec![0usize; bins];
    let width = hi - lo;
    for &x in xs {
        let b = (((x - lo) / width) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let n = xs.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

pub fn window_stats(window: &[ImuSample], entropy_bins: usize) -> WindowStats {
    let energy = window
        .iter()
        .map(|s| Channel::GYRO.iter().map(|&c| s.get(c).powi(2)).sum::<f64>())
        .sum();
    let variance = Channel::ALL
        .iter()
        .map(|&c| population_variance(window.iter().map(|s| s.get(c))))
        .sum();
    let (gy_min, gy_max) = window.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        let v = s.get(Channel::Gy);
        (lo.min(v), hi.max(v))
    });
    let az: Vec<f64> = window.iter().map(|s| s.get(Channel::Az)).collect();
    WindowStats {
        energy,
        variance,
        gy_range: if window.is_empty() { 0.0 } else { gy_max - gy_min },
        az_entropy: histogram_entropy(&az, entropy_bins),
    }
}

pub fn slide_windows(bite: &ImuStream, cfg: &StatisticalConfig) -> Result<Vec<WindowStats>> {
    if bite.is_empty() {
        return Err(Error::EmptyBite);
    }
    let (w, step) = window_lengths(bite.fs(), cfg.window_s, cfg.step_s);
    let samples = bite.samples();
    Ok(window_starts(samples.len(), w, step)
        .map(|(a, b)| window_stats(&samples[a..b], cfg.entropy_bins))
        .collect())
}

/// `(f3, f4, f5, f6)`: skewness of energy, skewness of total variance, max
/// gyro-y range and min az entropy.
pub fn aggregate_stat_features(stats: &[WindowStats]) -> Result<[f64; 4]> {
    if stats.is_empty() {
        return Err(Error::NoWindows);
    }
    let energy: Vec<f64> = stats.iter().map(|s| s.energy).collect();
    let variance: Vec<f64> = stats.iter().map(|s| s.variance).collect();
    let f5 = stats.iter().map(|s| s.gy_range).fold(f64::NEG_INFINITY, f64::max);
    let f6 = stats.iter().map(|s| s.az_entropy).fold(f64::INFINITY, f64::min);
    Ok([skewness(&energy), skewness(&variance), f5, f6])
}

pub fn statistical_features(bite: &ImuStream, cfg: &StatisticalConfig) -> Result<[f64; 4]> {
    aggregate_stat_features(&slide_windows(bite, cfg)?)
}
