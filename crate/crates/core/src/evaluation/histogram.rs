use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::FoldResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub low_g: f64,
    pub high_g: f64,
    pub count: usize,
}

/// Distribution of absolute errors with the MAE marker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorHistogram {
    pub bin_width_g: f64,
    pub bins: Vec<HistogramBin>,
    pub mae_g: f64,
    pub total: usize,
}

impl ErrorHistogram {
    /// `bin_low_g,bin_high_g,count` rows followed by an `mae` row carrying the
    /// MAE marker and the total count.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low_g,bin_high_g,count\n");
        for b in &self.bins {
            let _ = writeln!(out, "{},{},{}", b.low_g, b.high_g, b.count);
        }
        let _ = writeln!(out, "mae,{},{}", self.mae_g, self.total);
        out
    }
}

/// Bin `k` counts absolute errors in `[k * w, (k + 1) * w)`.
pub fn error_histogram(folds: &[FoldResult], bin_width_g: f64) -> Result<ErrorHistogram> {
    if !(bin_width_g.is_finite() && bin_width_g > 0.0) {
        return Err(Error::InvalidParams(format!("bin width {bin_width_g} must be positive")));
    }
    let errors: Vec<f64> = folds.iter().flat_map(FoldResult::abs_errors).collect();
    if errors.is_empty() {
        return Err(Error::InvalidParams("no errors to bin".into()));
    }
    let bin_of = |e: f64| (e / bin_width_g).floor() as usize;
    let n_bins = errors.iter().map(|&e| bin_of(e)).max().unwrap_or(0) + 1;
    let mut counts = vec![0usize; n_bins];
    for &e in &errors {
        counts[bin_of(e)] += 1;
    }
    let bins = counts
        .into_iter()
        .enumerate()
        .map(|(k, count)| HistogramBin {
            low_g: k as f64 * bin_width_g,
            high_g: (k + 1) as f64 * bin_width_g,
            count,
        })
        .collect();
    Ok(ErrorHistogram {
        bin_width_g,
        bins,
        mae_g: errors.iter().sum::<f64>() / errors.len() as f64,
        total: errors.len(),
    })
}
