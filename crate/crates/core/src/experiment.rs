//! End-to-end runs: dataset loading or synthesis, preprocessing, feature
//! extraction for every pipeline, LOSO training and artifact emission.
//!
//! Folds run in parallel; every reduction is ordered by subject id and bite
//! key, so a given [`RunConfig`] always produces byte-identical artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::evaluation::{
    audit_fold_manifest, common_subset, compute_metrics, error_histogram, generate_synthetic, loso_split,
    FoldManifest, FoldManifestEntry, FoldResult, MetricsReport, SynthProfile,
};
use crate::io::{load_dataset, read_json, write_json};
use crate::model::{BiteKey, Session};
use crate::pipeline::{extract_features, BiteRow, FeatureTable, Pipeline, TrainedModel};
use crate::preprocess::preprocess_session;

pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Preprocess,
    Features,
    Train,
    Predict,
    Evaluate,
    Synth,
    Report,
}

/// Where sessions come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    Manifest { path: PathBuf },
    Synth { subjects: usize, profile: SynthProfile },
}

/// Fully resolved configuration of one run; serialized as `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub data: DataSource,
    pub output_dir: PathBuf,
    pub pipeline: Pipeline,
    pub seed: u64,
    pub histogram_bin_g: f64,
    pub config: PipelineConfig,
}

impl RunConfig {
    pub fn new(command: Command, data: DataSource, output_dir: PathBuf, pipeline: Pipeline, seed: u64) -> Self {
        let mut config = PipelineConfig::default();
        config.forest.seed = seed;
        Self {
            command,
            data,
            output_dir,
            pipeline,
            seed,
            histogram_bin_g: 1.0,
            config,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

pub fn load_sessions(data: &DataSource, seed: u64) -> Result<Vec<Session>> {
    match data {
        DataSource::Manifest { path } => load_dataset(path),
        DataSource::Synth { subjects, profile } => generate_synthetic(*subjects, seed, profile),
    }
}

pub fn preprocess_all(sessions: &[Session], cfg: &PipelineConfig) -> Result<Vec<Session>> {
    sessions
        .par_iter()
        .map(|s| preprocess_session(s, &cfg.preprocess))
        .collect()
}

/// Per-bite feature CSV: `bite_id,<feature names>,weight_g`.
pub fn features_csv(table: &FeatureTable) -> String {
    let mut out = String::from("bite_id");
    for name in table.pipeline.feature_names() {
        out.push(',');
        out.push_str(&name);
    }
    out.push_str(",weight_g\n");
    for row in &table.rows {
        let _ = write!(out, "{}", row.key);
        for v in &row.features {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{}", row.weight_g);
    }
    out
}

/// Everything an evaluation run produced, before it is written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub folds: Vec<FoldResult>,
    pub manifest: FoldManifest,
    /// Fitted model of each fold, keyed by test subject.
    pub models: Vec<(String, TrainedModel)>,
    pub common_subset: BTreeSet<BiteKey>,
    /// Bites each pipeline could not process.
    pub skipped: BTreeMap<String, usize>,
}

struct PipelineFolds {
    folds: Vec<FoldResult>,
    manifest: FoldManifest,
    models: Vec<(String, TrainedModel)>,
}

fn run_folds(
    pipeline: Pipeline,
    table: &FeatureTable,
    common: &BTreeSet<BiteKey>,
    subjects: &[String],
    cfg: &PipelineConfig,
) -> Result<PipelineFolds> {
    let rows: Vec<&BiteRow> = table.rows.iter().filter(|r| common.contains(&r.key)).collect();
    let per_fold: Vec<Option<(FoldResult, FoldManifestEntry, TrainedModel)>> = subjects
        .par_iter()
        .map(|subject| {
            let (test, train): (Vec<&BiteRow>, Vec<&BiteRow>) =
                rows.iter().partition(|r| &r.key.subject == subject);
            if test.is_empty() {
                log::warn!("{pipeline}: subject {subject} has no bites in the common subset; fold skipped");
                return Ok(None);
            }
            let model = TrainedModel::fit(pipeline, &train, cfg)?;
            let fold = FoldResult {
                subject_id: subject.clone(),
                model_tag: pipeline.tag().to_owned(),
                bite_keys: test.iter().map(|r| r.key.clone()).collect(),
                predictions: test.iter().map(|r| model.predict(&r.features)).collect(),
                truths: test.iter().map(|r| r.weight_g).collect(),
            };
            let entry = FoldManifestEntry {
                test_subject: subject.clone(),
                train_bites: train.iter().map(|r| r.key.clone()).collect(),
                test_bites: fold.bite_keys.clone(),
            };
            Ok(Some((fold, entry, model)))
        })
        .collect::<Result<_>>()?;

    let mut out = PipelineFolds {
        folds: Vec::new(),
        manifest: FoldManifest {
            model_tag: pipeline.tag().to_owned(),
            folds: Vec::new(),
        },
        models: Vec::new(),
    };
    for (fold, entry, model) in per_fold.into_iter().flatten() {
        out.models.push((fold.subject_id.clone(), model));
        out.folds.push(fold);
        out.manifest.folds.push(entry);
    }
    let violations = audit_fold_manifest(&out.manifest);
    if !violations.is_empty() {
        return Err(Error::InvariantViolation(violations.join("; ")));
    }
    Ok(out)
}

/// LOSO evaluation of `pipeline` against the baseline on preprocessed
/// sessions. All three pipelines are featurized so that metrics are computed
/// on the bites every one of them can use.
pub fn evaluate_sessions(sessions: &[Session], pipeline: Pipeline, cfg: &PipelineConfig) -> Result<Evaluation> {
    let folds = loso_split(sessions)?;
    let subjects: Vec<String> = folds.into_iter().map(|f| f.test_subject).collect();

    let tables: Vec<FeatureTable> = Pipeline::ALL.iter().map(|&p| extract_features(p, sessions, cfg)).collect();
    let usable: BTreeMap<String, BTreeSet<BiteKey>> = tables
        .iter()
        .map(|t| (t.pipeline.tag().to_owned(), t.keys().cloned().collect()))
        .collect();
    let skipped = tables
        .iter()
        .map(|t| (t.pipeline.tag().to_owned(), t.skipped.len()))
        .collect();
    let common = common_subset(&usable)?;
    let table_of = |p: Pipeline| tables.iter().find(|t| t.pipeline == p).expect("every pipeline featurized");

    let model = run_folds(pipeline, table_of(pipeline), &common, &subjects, cfg)?;
    let report = if pipeline == Pipeline::Baseline {
        compute_metrics(&model.folds, &model.folds)?.mark_baseline()
    } else {
        let base = run_folds(Pipeline::Baseline, table_of(Pipeline::Baseline), &common, &subjects, cfg)?;
        compute_metrics(&model.folds, &base.folds)?
    };
    Ok(Evaluation {
        report,
        folds: model.folds,
        manifest: model.manifest,
        models: model.models,
        common_subset: common,
        skipped,
    })
}

/// Runs an evaluation and writes `metrics_<p>.json`, `histogram_<p>.csv`,
/// `folds_<p>.json`, `models/<p>/fold_<subject>.json` and `run.json` into
/// the output directory.
pub fn run_evaluate(run: &RunConfig) -> Result<Evaluation> {
    if !(run.histogram_bin_g > 0.0 && run.histogram_bin_g.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "histogram bin width must be positive, got {}",
            run.histogram_bin_g
        )));
    }
    let raw = load_sessions(&run.data, run.seed)?;
    let sessions = preprocess_all(&raw, &run.config)?;
    let eval = evaluate_sessions(&sessions, run.pipeline, &run.config)?;
    log::info!(
        "{}: {} bites in the common subset, skipped per pipeline {:?}",
        run.pipeline,
        eval.common_subset.len(),
        eval.skipped
    );

    let dir = &run.output_dir;
    let tag = run.pipeline.tag();
    let models_dir = dir.join("models").join(tag);
    std::fs::create_dir_all(&models_dir).map_err(|e| Error::io(&models_dir, e))?;
    write_json(&dir.join(format!("metrics_{tag}.json")), &eval.report)?;
    let hist = error_histogram(&eval.folds, run.histogram_bin_g)?;
    let hist_path = dir.join(format!("histogram_{tag}.csv"));
    std::fs::write(&hist_path, hist.to_csv()).map_err(|e| Error::io(&hist_path, e))?;
    write_json(&dir.join(format!("folds_{tag}.json")), &eval.manifest)?;
    for (subject, model) in &eval.models {
        write_json(&models_dir.join(format!("fold_{subject}.json")), model)?;
    }
    write_json(&dir.join(RUN_FILE), run)?;
    Ok(eval)
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: String,
    pub improvement_pct: Option<f64>,
    pub mae_g: f64,
    pub mape_pct: Option<f64>,
    pub mse_g2: f64,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_owned(), |x| format!("{x:.2}"))
}

/// Reads every `metrics_*.json` in `dir`, sorted by MAE ascending.
pub fn collect_reports(dir: &Path) -> Result<Vec<ReportRow>> {
    let no_reports = |reason: String| Error::NoReportsFound {
        dir: dir.to_owned(),
        reason,
    };
    let entries = std::fs::read_dir(dir).map_err(|e| no_reports(e.to_string()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("metrics_") && n.ends_with(".json"))
        })
        .collect();
    if paths.is_empty() {
        return Err(no_reports("no metrics_*.json files".into()));
    }
    paths.sort();
    let mut rows = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|e| no_reports(format!("{}: {e}", path.display())))?;
        let r: MetricsReport =
            serde_json::from_str(&text).map_err(|e| no_reports(format!("{}: {e}", path.display())))?;
        rows.push(ReportRow {
            model: r.model_tag,
            improvement_pct: r.improvement_pct,
            mae_g: r.mae_g,
            mape_pct: r.mape_pct,
            mse_g2: r.mse_g2,
        });
    }
    rows.sort_by(|a, b| a.mae_g.total_cmp(&b.mae_g).then_with(|| a.model.cmp(&b.model)));
    Ok(rows)
}

pub const REPORT_COLUMNS: [&str; 5] = ["Model", "Improvement %", "MAE g", "MAPE %", "MSE g²"];

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = REPORT_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.2},{},{:.2}",
            r.model,
            cell(r.improvement_pct),
            r.mae_g,
            cell(r.mape_pct),
            r.mse_g2
        );
    }
    out
}

pub fn report_text(rows: &[ReportRow]) -> String {
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|r| {
            [
                r.model.clone(),
                cell(r.improvement_pct),
                format!("{:.2}", r.mae_g),
                cell(r.mape_pct),
                format!("{:.2}", r.mse_g2),
            ]
        })
        .collect();
    let mut widths = REPORT_COLUMNS.map(|c| c.chars().count());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |row: &[String]| {
        let parts: Vec<String> = row
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                let pad = w - c.chars().count();
                if i == 0 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        parts.join("  ").trim_end().to_owned()
    };
    let header: Vec<String> = REPORT_COLUMNS.iter().map(|s| s.to_string()).collect();
    let mut out = line(&header);
    out.push('\n');
    let rule: usize = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(rule));
    out.push('\n');
    for row in &cells {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// Builds the comparison table from the metrics files in `dir` and writes
/// `report.csv` and `report.txt` next to them.
pub fn run_report(dir: &Path) -> Result<Vec<ReportRow>> {
    let rows = collect_reports(dir)?;
    for (name, body) in [("report.csv", report_csv(&rows)), ("report.txt", report_text(&rows))] {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(rows)
}
