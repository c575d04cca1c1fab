use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::BiteKey;

/// Test-subject predictions of one model in one fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub subject_id: String,
    pub model_tag: String,
    pub bite_keys: Vec<BiteKey>,
    pub predictions: Vec<f64>,
    pub truths: Vec<f64>,
}

impl FoldResult {
    pub fn abs_errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.predictions.iter().zip(&self.truths).map(|(p, t)| (p - t).abs())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectMetrics {
    pub subject_id: String,
    pub n_bites: usize,
    pub mae_g: f64,
    pub baseline_mae_g: f64,
    pub improvement_pct: Option<f64>,
}

/// Predicted minus actual total weight of one meal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MealDiff {
    pub subject_id: String,
    pub session_id: String,
    pub predicted_total_g: f64,
    pub actual_total_g: f64,
    pub diff_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub model_tag: String,
    pub n_bites: usize,
    pub mae_g: f64,
    /// `None` when every bite weighs zero grams.
    pub mape_pct: Option<f64>,
    /// Zero-weight bites left out of MAPE only.
    pub mape_excluded: usize,
    pub mse_g2: f64,
    pub baseline_mae_g: f64,
    /// `None` for the baseline itself (and when the baseline MAE is zero).
    pub improvement_pct: Option<f64>,
    pub per_subject: Vec<SubjectMetrics>,
    pub meal_diffs: Vec<MealDiff>,
}

impl MetricsReport {
    /// Marks the report as describing the baseline, for which improvement is
    /// not applicable.
    pub fn mark_baseline(mut self) -> Self {
        self.improvement_pct = None;
        for s in &mut self.per_subject {
            s.improvement_pct = None;
        }
        self
    }
}

/// `(mae_baseline - mae_model) / mae_baseline * 100`; `None` when the
/// baseline MAE is zero.
pub fn improvement_pct(mae_baseline: f64, mae_model: f64) -> Option<f64> {
    (mae_baseline > 0.0).then(|| (mae_baseline - mae_model) / mae_baseline * 100.0)
}

struct Entry {
    subject: String,
    pred: f64,
    truth: f64,
}

fn index(folds: &[FoldResult]) -> Result<BTreeMap<BiteKey, Entry>> {
    let mut map = BTreeMap::new();
    for f in folds {
        if f.predictions.len() != f.bite_keys.len() || f.truths.len() != f.bite_keys.len() {
            return Err(Error::DimensionMismatch {
                expected: f.bite_keys.len(),
                got: f.predictions.len().min(f.truths.len()),
            });
        }
        for ((k, &pred), &truth) in f.bite_keys.iter().zip(&f.predictions).zip(&f.truths) {
            let prev = map.insert(
                k.clone(),
                Entry {
                    subject: f.subject_id.clone(),
                    pred,
                    truth,
                },
            );
            if prev.is_some() {
                return Err(Error::InvariantViolation(format!("bite {k} predicted twice")));
            }
        }
    }
    Ok(map)
}

fn mae<'a>(it: impl Iterator<Item = (&'a Entry, &'a Entry)>) -> (f64, f64, usize) {
    let (mut m, mut b, mut n) = (0.0, 0.0, 0usize);
    for (e, base) in it {
        m += (e.pred - e.truth).abs();
        b += (base.pred - base.truth).abs();
        n += 1;
    }
    (m / n as f64, b / n as f64, n)
}

/// MAE, MAPE, MSE and improvement over the baseline, overall and per
/// subject, plus per-meal total differences. Both fold sets must cover the
/// same bites.
pub fn compute_metrics(folds: &[FoldResult], baseline_folds: &[FoldResult]) -> Result<MetricsReport> {
    let model = index(folds)?;
    let base = index(baseline_folds)?;
    if model.is_empty() || !model.keys().eq(base.keys()) {
        return Err(Error::MismatchedBiteSets);
    }
    let pairs = || model.iter().zip(base.values()).map(|((k, e), b)| (k, e, b));

    let n = model.len();
    let (mae_g, baseline_mae_g, _) = mae(pairs().map(|(_, e, b)| (e, b)));
    let mse_g2 = pairs().map(|(_, e, _)| (e.pred - e.truth).powi(2)).sum::<f64>() / n as f64;
    let (mut ape, mut positive) = (0.0, 0usize);
    for (_, e, _) in pairs() {
        if e.truth > 0.0 {
            ape += (e.pred - e.truth).abs() / e.truth;
            positive += 1;
        }
    }
    let mape_pct = (positive > 0).then(|| ape / positive as f64 * 100.0);

    let mut by_subject: BTreeMap<&str, Vec<(&Entry, &Entry)>> = BTreeMap::new();
    let mut by_meal: BTreeMap<(&str, &str), (f64, f64)> = BTreeMap::new();
    for (k, e, b) in pairs() {
        by_subject.entry(e.subject.as_str()).or_default().push((e, b));
        let meal = by_meal.entry((&k.subject, &k.session)).or_default();
        meal.0 += e.pred;
        meal.1 += e.truth;
    }
    let per_subject = by_subject
        .into_iter()
        .map(|(s, rows)| {
            let (m, b, n) = mae(rows.into_iter());
            SubjectMetrics {
                subject_id: s.to_owned(),
                n_bites: n,
                mae_g: m,
                baseline_mae_g: b,
                improvement_pct: improvement_pct(b, m),
            }
        })
        .collect();
    let meal_diffs = by_meal
        .into_iter()
        .map(|((subject, session), (pred, truth))| MealDiff {
            subject_id: subject.to_owned(),
            session_id: session.to_owned(),
            predicted_total_g: pred,
            actual_total_g: truth,
            diff_g: pred - truth,
        })
        .collect();

    Ok(MetricsReport {
        model_tag: folds.first().map(|f| f.model_tag.clone()).unwrap_or_default(),
        n_bites: n,
        mae_g,
        mape_pct,
        mape_excluded: n - positive,
        mse_g2,
        baseline_mae_g,
        improvement_pct: improvement_pct(baseline_mae_g, mae_g),
        per_subject,
        meal_diffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fold(tag: &str, preds: &[f64], truths: &[f64]) -> FoldResult {
        FoldResult {
            subject_id: "S1".into(),
            model_tag: tag.into(),
            bite_keys: (0..preds.len()).map(|i| BiteKey::new("S1", "m", &i.to_string())).collect(),
            predictions: preds.to_vec(),
            truths: truths.to_vec(),
        }
    }

    #[test]
    fn arithmetic() {
        let m = fold("m", &[2.0, 4.0], &[1.0, 2.0]);
        let r = compute_metrics(&[m.clone()], &[m]).unwrap();
        assert_eq!(r.mae_g, 1.5);
        assert_eq!(r.mse_g2, 2.5);
        assert_eq!(r.mape_pct, Some(100.0));
        assert_eq!(r.improvement_pct, Some(0.0));
        assert_eq!(r.meal_diffs[0].diff_g, 3.0);
    }

    #[test]
    fn published_improvement() {
        let v = improvement_pct(4.83, 3.99).unwrap();
        assert!((v - 17.39).abs() < 0.1);
        assert!((v - 17.41).abs() < 0.1);
        assert_eq!(improvement_pct(0.0, 1.0), None);
    }

    #[test]
    fn zero_weights_excluded_from_mape() {
        let m = fold("m", &[1.0, 3.0], &[0.0, 2.0]);
        let r = compute_metrics(&[m.clone()], &[m]).unwrap();
        assert_eq!(r.mape_excluded, 1);
        assert_eq!(r.mape_pct, Some(50.0));
    }

    #[test]
    fn mismatched_sets() {
        let a = fold("m", &[1.0, 2.0], &[1.0, 2.0]);
        let b = fold("b", &[1.0], &[1.0]);
        assert!(matches!(compute_metrics(&[a], &[b]), Err(Error::MismatchedBiteSets)));
    }
}
