//! Small descriptive-statistics helpers. All variances use population
//! normalization.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Two-pass population variance; zero for empty input.
pub fn population_variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let (n, sum) = xs.clone().fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        return 0.0;
    }
    let m = sum / n as f64;
    xs.map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64
}

pub fn population_std(xs: &[f64]) -> f64 {
    population_variance(xs.iter().copied()).sqrt()
}

/// Population covariance of two equal-length series.
pub fn population_covariance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.is_empty() {
        return 0.0;
    }
    let (ma, mb) = (mean(a), mean(b));
    a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / a.len() as f64
}

/// Second moment below which a series counts as constant.
pub const DEGENERATE_M2: f64 = 1e-12;

/// Biased moment coefficient of skewness `m3 / m2^(3/2)`; zero for constant
/// (or empty) series.
pub fn skewness(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    let n = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    if m2 <= DEGENERATE_M2 {
        return 0.0;
    }
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}
