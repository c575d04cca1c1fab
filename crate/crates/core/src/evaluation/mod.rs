//! Leave-one-subject-out evaluation, metrics and the synthetic dataset
//! generator.

mod histogram;
mod loso;
mod metrics;
pub mod synth;

pub use histogram::{error_histogram, ErrorHistogram, HistogramBin};
pub use loso::{audit_fold_manifest, common_subset, loso_split, Fold, FoldManifest, FoldManifestEntry};
pub use metrics::{
    compute_metrics, improvement_pct, FoldResult, MealDiff, MetricsReport, SubjectMetrics,
};
pub use synth::{generate_synthetic, generate_synthetic_raw, SynthProfile};
