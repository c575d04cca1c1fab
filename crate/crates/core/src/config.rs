//! Every tunable constant of the pipeline lives here so that runs can be
//! reproduced from a single serialized value.

use serde::{Deserialize, Serialize};

/// Signal-conditioning constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub target_hz: f64,
    pub highpass_taps: usize,
    pub highpass_cutoff_hz: f64,
    pub median_order: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            target_hz: 100.0,
            highpass_taps: 501,
            highpass_cutoff_hz: 1.0,
            median_order: 5,
        }
    }
}

/// Constants of the micromovement-derived features (food gathering duration
/// and stillness score).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BehavioralConfig {
    /// Micromovement window step in seconds.
    pub window_step_s: f64,
    /// Micromovement window length in seconds.
    pub window_len_s: f64,
    /// A window is a strong pick-food window when `p` exceeds this.
    pub p_strong: f64,
    /// Lower bound of the bridgeable interruption band `[p_weak, p_strong]`.
    pub p_weak: f64,
    /// Longest bridgeable interruption, in windows.
    pub max_gap_windows: usize,
    pub v_min: f64,
    pub v_max: f64,
    /// Upper bound of the transport duration, in micromovement frames.
    pub d_max_frames: f64,
}

impl Default for BehavioralConfig {
    fn default() -> Self {
        Self {
            window_step_s: 0.1,
            window_len_s: 0.2,
            p_strong: 0.45,
            p_weak: 0.25,
            max_gap_windows: 2,
            v_min: 1.0,
            v_max: 10.0,
            d_max_frames: 35.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatisticalConfig {
    pub window_s: f64,
    pub step_s: f64,
    pub entropy_bins: usize,
}

impl Default for StatisticalConfig {
    fn default() -> Self {
        Self {
            window_s: 2.0,
            step_s: 0.1,
            entropy_bins: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MirtchoukConfig {
    pub window_s: f64,
    pub step_s: f64,
}

impl Default for MirtchoukConfig {
    fn default() -> Self {
        Self {
            window_s: 5.0,
            step_s: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvrParams {
    pub c: f64,
    pub eps: f64,
    /// Duality-gap stopping threshold.
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            c: 1.01,
            eps: 0.016,
            tol: 1e-6,
            max_passes: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub seed: u64,
    pub bootstrap: bool,
    /// Features tried per split; `None` means `ceil(d / 3)`.
    pub max_features: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self {
            n_trees: 40,
            seed: 0,
            bootstrap: true,
            max_features: None,
        }
    }
}

/// Full set of pipeline constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub preprocess: PreprocessConfig,
    pub behavioral: BehavioralConfig,
    pub statistical: StatisticalConfig,
    pub mirtchouk: MirtchoukConfig,
    pub svr: SvrParams,
    pub forest: ForestParams,
}
