use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns whose standard deviation is at or below this are only centered.
pub const MIN_STD: f64 = 1e-12;

/// Per-feature z-score parameters (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ScalerParams {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        let first = x.first().ok_or(Error::EmptyMatrix)?;
        let d = first.len();
        let n = x.len() as f64;
        let mut means = vec![0.0; d];
        for row in x {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut stds = vec![0.0; d];
        for row in x {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        stds.iter_mut().for_each(|s| *s = (*s / n).sqrt());
        Ok(Self { means, stds })
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| {
                let scale = if *s <= MIN_STD { 1.0 } else { *s };
                (v - m) / scale
            })
            .collect()
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardizes_column() {
        let x = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]];
        let p = ScalerParams::fit(&x).unwrap();
        assert_eq!(p.means, vec![2.0, 5.0]);
        assert!((p.stds[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let z = p.transform(&x);
        for (zi, expect) in z.iter().zip([-1.2247, 0.0, 1.2247]) {
            assert!((zi[0] - expect).abs() < 1e-4);
            assert_eq!(zi[1], 0.0);
        }
        let col_mean: f64 = z.iter().map(|r| r[0]).sum::<f64>() / 3.0;
        assert!(col_mean.abs() < 1e-12);
    }

    #[test]
    fn empty_matrix() {
        assert!(matches!(ScalerParams::fit(&[]), Err(Error::EmptyMatrix)));
    }
}
