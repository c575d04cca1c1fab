//! Per-bite food weight estimation from wrist-worn IMU recordings.
//!
//! The crate covers the whole chain: loading annotated meal recordings,
//! signal conditioning, behavioral and statistical per-bite features, the
//! linear SVR estimator with its mean-weight baseline, a sliding-window
//! random-forest comparison pipeline, and a leave-one-subject-out harness
//! with a synthetic data generator.

pub mod behavioral;
pub mod config;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod io;
pub mod mirtchouk;
pub mod model;
pub mod pipeline;
pub mod preprocess;
pub mod regression;
pub mod statistical;
pub mod stats;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use model::{BiteAnnotation, BiteKey, Channel, Gesture, ImuSample, ImuStream, MicromovementWindow, Session, Wrist};
pub use pipeline::{FeatureVector, Pipeline, TrainedModel};
