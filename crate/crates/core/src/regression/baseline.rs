use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Predicts the mean training weight for every bite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselinePredictor {
    pub mean_weight_g: f64,
}

impl BaselinePredictor {
    pub fn fit(y: &[f64]) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyTraining);
        }
        let mean_weight_g = y.iter().sum::<f64>() / y.len() as f64;
        if !mean_weight_g.is_finite() {
            return Err(Error::InvalidParams("non-finite training weights".into()));
        }
        Ok(Self { mean_weight_g })
    }

    pub fn predict(&self) -> f64 {
        self.mean_weight_g
    }
}
