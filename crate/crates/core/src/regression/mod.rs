//! Learners: z-score scaling, linear epsilon-insensitive SVR, the
//! mean-weight baseline and a random-forest regressor.

mod baseline;
mod forest;
mod scaler;
mod svr;

pub use baseline::BaselinePredictor;
pub use forest::{fit_tree, ForestModel, RegressionTree, TreeNode};
pub use scaler::ScalerParams;
pub use svr::{fit_linear_svr, primal_objective, LinearSvrFit, SvrModel};

use crate::error::{Error, Result};

/// Checks that `x` is a non-empty rectangular matrix matching `y`.
pub(crate) fn check_xy(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptyTraining);
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let d = x[0].len();
    if let Some(row) = x.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: row.len(),
        });
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParams("training data must be finite".into()));
    }
    Ok(d)
}
