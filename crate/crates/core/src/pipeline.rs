//! Per-bite feature extraction for each compared model, and a uniform
//! wrapper over the fitted learners.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::behavioral::behavioral_features;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::mirtchouk::{bite_feature_names, mirtchouk_features};
use crate::model::{BiteKey, Session};
use crate::regression::{BaselinePredictor, ForestModel, SvrModel};
use crate::statistical::statistical_features;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    /// Behavioral + statistical features with a linear SVR.
    Proposed,
    /// Sliding-window comparison features with a random forest.
    Mirtchouk,
    /// Mean training weight.
    Baseline,
}

impl Pipeline {
    pub const ALL: [Pipeline; 3] = [Pipeline::Proposed, Pipeline::Mirtchouk, Pipeline::Baseline];

    pub fn tag(self) -> &'static str {
        match self {
            Pipeline::Proposed => "proposed",
            Pipeline::Mirtchouk => "mirtchouk",
            Pipeline::Baseline => "baseline",
        }
    }

    pub fn feature_names(self) -> Vec<String> {
        match self {
            Pipeline::Proposed => FeatureVector::NAMES.iter().map(|s| s.to_string()).collect(),
            Pipeline::Mirtchouk => bite_feature_names(),
            Pipeline::Baseline => Vec::new(),
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Pipeline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.tag() == s)
            .ok_or_else(|| format!("unknown pipeline `{s}` (expected proposed, mirtchouk or baseline)"))
    }
}

/// The six proposed per-bite features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Food gathering duration, seconds.
    pub f1: f64,
    /// Stillness score.
    pub f2: f64,
    /// Skewness of windowed gyroscope energy.
    pub f3: f64,
    /// Skewness of windowed total variance.
    pub f4: f64,
    /// Largest windowed gyro-y range, rad/s.
    pub f5: f64,
    /// Smallest windowed az entropy, nats.
    pub f6: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 6] = ["f1", "f2", "f3", "f4", "f5", "f6"];

    pub fn to_array(&self) -> [f64; 6] {
        [self.f1, self.f2, self.f3, self.f4, self.f5, self.f6]
    }

    pub fn check(&self) -> Result<()> {
        let max_f2 = 1.0 + 2f64.ln() + 1e-12;
        if self.to_array().iter().any(|v| !v.is_finite())
            || self.f1 < 0.0
            || !(0.0..=max_f2).contains(&self.f2)
        {
            return Err(Error::InvariantViolation(format!("feature vector out of range: {self:?}")));
        }
        Ok(())
    }
}

/// Proposed features of one bite of a preprocessed session.
pub fn proposed_features(session: &Session, bite_id: &str, cfg: &PipelineConfig) -> Result<FeatureVector> {
    let (imu, windows) = session.slice_bite(bite_id)?;
    if imu.is_empty() {
        return Err(Error::EmptyBite);
    }
    let (f1, f2) = behavioral_features(&windows, &imu, &cfg.behavioral)?;
    let [f3, f4, f5, f6] = statistical_features(&imu, &cfg.statistical)?;
    let fv = FeatureVector { f1, f2, f3, f4, f5, f6 };
    fv.check()?;
    Ok(fv)
}

pub fn bite_features(
    pipeline: Pipeline,
    session: &Session,
    bite_id: &str,
    cfg: &PipelineConfig,
) -> Result<Vec<f64>> {
    match pipeline {
        Pipeline::Proposed => Ok(proposed_features(session, bite_id, cfg)?.to_array().to_vec()),
        Pipeline::Mirtchouk => {
            let (imu, _) = session.slice_bite(bite_id)?;
            mirtchouk_features(&imu, &cfg.mirtchouk)
        }
        Pipeline::Baseline => session.bite(bite_id).map(|_| Vec::new()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiteRow {
    pub key: BiteKey,
    pub weight_g: f64,
    pub features: Vec<f64>,
}

/// Feature rows of every bite a pipeline could process, plus the bites it
/// had to skip and why.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub pipeline: Pipeline,
    pub rows: Vec<BiteRow>,
    pub skipped: Vec<(BiteKey, String)>,
}

impl FeatureTable {
    pub fn keys(&self) -> impl Iterator<Item = &BiteKey> {
        self.rows.iter().map(|r| &r.key)
    }
}

/// Extracts features for every bite of every (preprocessed) session.
pub fn extract_features(pipeline: Pipeline, sessions: &[Session], cfg: &PipelineConfig) -> FeatureTable {
    let per_bite: Vec<(BiteKey, f64, Result<Vec<f64>>)> = sessions
        .par_iter()
        .flat_map_iter(|s| {
            s.bites.iter().map(move |b| {
                (s.bite_key(b), b.weight_g, bite_features(pipeline, s, &b.bite_id, cfg))
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (key, weight_g, res) in per_bite {
        match res {
            Ok(features) => rows.push(BiteRow {
                key,
                weight_g,
                features,
            }),
            Err(e) => {
                log::debug!("{pipeline}: skipping bite {key}: {e}");
                skipped.push((key, e.to_string()));
            }
        }
    }
    FeatureTable {
        pipeline,
        rows,
        skipped,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "pipeline", rename_all = "lowercase")]
pub enum TrainedModel {
    Proposed { svr: SvrModel },
    Mirtchouk { forest: ForestModel },
    Baseline { baseline: BaselinePredictor },
}

impl TrainedModel {
    pub fn fit(pipeline: Pipeline, rows: &[&BiteRow], cfg: &PipelineConfig) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyTraining);
        }
        let x: Vec<Vec<f64>> = rows.iter().map(|r| r.features.clone()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.weight_g).collect();
        Ok(match pipeline {
            Pipeline::Proposed => TrainedModel::Proposed {
                svr: SvrModel::fit(&x, &y, &cfg.svr)?,
            },
            Pipeline::Mirtchouk => TrainedModel::Mirtchouk {
                forest: ForestModel::fit(&x, &y, &cfg.forest)?,
            },
            Pipeline::Baseline => TrainedModel::Baseline {
                baseline: BaselinePredictor::fit(&y)?,
            },
        })
    }

    pub fn pipeline(&self) -> Pipeline {
        match self {
            TrainedModel::Proposed { .. } => Pipeline::Proposed,
            TrainedModel::Mirtchouk { .. } => Pipeline::Mirtchouk,
            TrainedModel::Baseline { .. } => Pipeline::Baseline,
        }
    }

    pub fn predict(&self, features: &[f64]) -> f64 {
        match self {
            TrainedModel::Proposed { svr } => svr.predict(features),
            TrainedModel::Mirtchouk { forest } => forest.predict(features),
            TrainedModel::Baseline { baseline } => baseline.predict(),
        }
    }
}
