//! Comparison feature set: 28 per-window features over 5 s windows,
//! summarized per bite by their mean and standard deviation (56 values).

use nalgebra::{DMatrix, DVector};

use crate::config::MirtchoukConfig;
use crate::error::{Error, Result};
use crate::model::{Channel, ImuSample, ImuStream};
use crate::statistical::{window_lengths, window_starts};
use crate::stats::{mean, population_covariance, population_std, population_variance};

pub const STAT_LEN: usize = 11;
pub const SHAPE_LEN: usize = 15;
pub const FREQ_LEN: usize = 2;
pub const WINDOW_LEN: usize = STAT_LEN + SHAPE_LEN + FREQ_LEN;
pub const BITE_LEN: usize = 2 * WINDOW_LEN;
pub const POLY_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct MirtchoukWindowFeatures {
    /// Six channel means, accel and gyro total variance, mean absolute first
    /// difference of accel and gyro magnitude, accel/gyro magnitude
    /// covariance.
    pub stat: [f64; STAT_LEN],
    /// Quartic coefficients (constant term first) for ax, ay, az over
    /// normalized time.
    pub shape: [f64; SHAPE_LEN],
    /// Mean and standard deviation across channels of the zero-crossing rate.
    pub freq: [f64; FREQ_LEN],
}

impl MirtchoukWindowFeatures {
    pub fn to_vec(&self) -> Vec<f64> {
        self.stat
            .iter()
            .chain(&self.shape)
            .chain(&self.freq)
            .copied()
            .collect()
    }
}

/// Per-window feature names, in [`MirtchoukWindowFeatures::to_vec`] order.
pub fn window_feature_names() -> Vec<String> {
    let mut names: Vec<String> = Channel::ALL.iter().map(|c| format!("mean_{}", c.name())).collect();
    names.extend(
        ["var_acc", "var_gyro", "dmag_acc", "dmag_gyro", "cov_mag"]
            .iter()
            .map(|s| s.to_string()),
    );
    for ch in Channel::ACCEL {
        names.extend((0..=POLY_DEGREE).map(|k| format!("poly_{}_{k}", ch.name())));
    }
    names.push("zcr_mean".into());
    names.push("zcr_std".into());
    names
}

/// Column names of the 56-value bite vector.
pub fn bite_feature_names() -> Vec<String> {
    let w = window_feature_names();
    w.iter()
        .map(|n| format!("{n}_mean"))
        .chain(w.iter().map(|n| format!("{n}_std")))
        .collect()
}

/// Ordinary least squares polynomial of degree `min(degree, n - 1)` on time
/// normalized to `[0, 1]`, solved through the normal equations; missing
/// higher coefficients are zero.
pub fn polyfit_normalized(ys: &[f64], degree: usize) -> Vec<f64> {
    let mut coefs = vec![0.0; degree + 1];
    let n = ys.len();
    if n == 0 {
        return coefs;
    }
    if n == 1 {
        coefs[0] = ys[0];
        return coefs;
    }
    let deg = degree.min(n - 1);
    let k = deg + 1;
    let vander = DMatrix::from_fn(n, k, |i, j| (i as f64 / (n - 1) as f64).powi(j as i32));
    let normal = vander.transpose() * &vander;
    let rhs = vander.transpose() * DVector::from_column_slice(ys);
    let solution = normal
        .clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| normal.lu().solve(&rhs));
    if let Some(sol) = solution {
        coefs[..k].copy_from_slice(sol.as_slice());
    }
    coefs
}

/// Sign changes divided by `n - 1`; zero for fewer than two samples.
pub fn zero_crossing_rate(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let changes = xs.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    changes as f64 / (xs.len() - 1) as f64
}

fn magnitude(s: &ImuSample, chans: [Channel; 3]) -> f64 {
    chans.iter().map(|&c| s.get(c).powi(2)).sum::<f64>().sqrt()
}

fn mean_abs_diff(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    xs.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn window_features(window: &[ImuSample]) -> MirtchoukWindowFeatures {
    let channels: Vec<Vec<f64>> = Channel::ALL
        .iter()
        .map(|&c| window.iter().map(|s| s.get(c)).collect())
        .collect();
    let acc_mag: Vec<f64> = window.iter().map(|s| magnitude(s, Channel::ACCEL)).collect();
    let gyro_mag: Vec<f64> = window.iter().map(|s| magnitude(s, Channel::GYRO)).collect();
    let total_var = |chans: [Channel; 3]| -> f64 {
        chans
            .iter()
            .map(|c| population_variance(channels[c.index()].iter().copied()))
            .sum()
    };

    let mut stat = [0.0; STAT_LEN];
    for (i, ch) in channels.iter().enumerate() {
        stat[i] = mean(ch);
    }
    stat[6] = total_var(Channel::ACCEL);
    stat[7] = total_var(Channel::GYRO);
    stat[8] = mean_abs_diff(&acc_mag);
    stat[9] = mean_abs_diff(&gyro_mag);
    stat[10] = population_covariance(&acc_mag, &gyro_mag);

    let mut shape = [0.0; SHAPE_LEN];
    for (k, ch) in Channel::ACCEL.iter().enumerate() {
        let coefs = polyfit_normalized(&channels[ch.index()], POLY_DEGREE);
        shape[k * 5..k * 5 + 5].copy_from_slice(&coefs);
    }

    let zcr: Vec<f64> = channels.iter().map(|c| zero_crossing_rate(c)).collect();
    MirtchoukWindowFeatures {
        stat,
        shape,
        freq: [mean(&zcr), population_std(&zcr)],
    }
}

pub fn mirtchouk_windows(bite: &ImuStream, cfg: &MirtchoukConfig) -> Result<Vec<MirtchoukWindowFeatures>> {
    if bite.is_empty() {
        return Err(Error::EmptyBite);
    }
    let (w, step) = window_lengths(bite.fs(), cfg.window_s, cfg.step_s);
    let samples = bite.samples();
    Ok(window_starts(samples.len(), w, step)
        .map(|(a, b)| window_features(&samples[a..b]))
        .collect())
}

/// Per-feature means followed by per-feature population standard
/// deviations across the bite's windows.
pub fn mirtchouk_bite_vector(windows: &[MirtchoukWindowFeatures]) -> Result<Vec<f64>> {
    if windows.is_empty() {
        return Err(Error::NoWindows);
    }
    let rows: Vec<Vec<f64>> = windows.iter().map(MirtchoukWindowFeatures::to_vec).collect();
    let column = |j: usize| -> Vec<f64> { rows.iter().map(|r| r[j]).collect() };
    let means = (0..WINDOW_LEN).map(|j| mean(&column(j)));
    let stds = (0..WINDOW_LEN).map(|j| population_std(&column(j)));
    Ok(means.chain(stds).collect())
}

pub fn mirtchouk_features(bite: &ImuStream, cfg: &MirtchoukConfig) -> Result<Vec<f64>> {
    mirtchouk_bite_vector(&mirtchouk_windows(bite, cfg)?)
}
