//! Features derived from the micromovement probability stream: food
//! gathering duration and transport stillness.

use crate::config::BehavioralConfig;
use crate::error::{Error, Result};
use crate::model::{Channel, Gesture, ImuStream, MicromovementWindow};
use crate::stats::population_variance;

/// Backward run of pick-food windows preceding the first mouth window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatheringRun {
    pub start_window: usize,
    pub end_window: usize,
    pub duration_s: f64,
}

impl GatheringRun {
    pub fn frames(&self) -> usize {
        self.end_window - self.start_window + 1
    }
}

/// Upward movement between gathering and mouth insertion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportSegment {
    pub start_window: usize,
    pub end_window: usize,
    /// Mean over the six channels of the per-channel variance.
    pub v_raw: f64,
    pub v_norm: f64,
    pub d_frames: usize,
    pub d_norm: f64,
}

impl TransportSegment {
    pub fn new(start_window: usize, end_window: usize, v_raw: f64, cfg: &BehavioralConfig) -> Self {
        let d_frames = end_window - start_window + 1;
        Self {
            start_window,
            end_window,
            v_raw,
            v_norm: normalize_variance(v_raw, cfg),
            d_frames,
            d_norm: normalize_duration(d_frames as f64, cfg),
        }
    }
}

pub fn normalize_variance(v_raw: f64, cfg: &BehavioralConfig) -> f64 {
    (v_raw.clamp(cfg.v_min, cfg.v_max) - cfg.v_min) / (cfg.v_max - cfg.v_min)
}

pub fn normalize_duration(frames: f64, cfg: &BehavioralConfig) -> f64 {
    frames.clamp(0.0, cfg.d_max_frames) / cfg.d_max_frames
}

/// Ordinal of the first window whose most probable class is `m`.
pub fn first_mouth_window(windows: &[MicromovementWindow]) -> Result<usize> {
    windows
        .iter()
        .position(|w| w.argmax() == Gesture::M)
        .ok_or(Error::NoMouthEvent)
}

/// Scans backward from the mouth window for the gathering run.
///
/// Windows before the mouth are skipped until one has `p > p_strong`; the
/// run then extends backward through strong windows. Up to
/// `max_gap_windows` consecutive windows with `p` in `[p_weak, p_strong]` are
/// absorbed when the window just before them is strong again; anything else
/// ends the run.
pub fn gathering_run(
    windows: &[MicromovementWindow],
    mouth_idx: usize,
    cfg: &BehavioralConfig,
) -> Option<GatheringRun> {
    let p = |i: usize| windows[i].prob(Gesture::P);
    let strong = |i: usize| p(i) > cfg.p_strong;
    let weak = |i: usize| (cfg.p_weak..=cfg.p_strong).contains(&p(i));

    let end = (0..mouth_idx.min(windows.len())).rev().find(|&i| strong(i))?;
    let mut start = end;
    loop {
        if start == 0 {
            break;
        }
        let prev = start - 1;
        if strong(prev) {
            start = prev;
            continue;
        }
        // measure the weak gap ending at `prev`
        let mut gap = 0;
        while gap < prev + 1 && gap <= cfg.max_gap_windows && weak(prev - gap) {
            gap += 1;
        }
        let bridged = gap >= 1
            && gap <= cfg.max_gap_windows
            && prev + 1 > gap
            && strong(prev - gap);
        if bridged {
            start = prev - gap;
        } else {
            break;
        }
    }
    Some(GatheringRun {
        start_window: start,
        end_window: end,
        duration_s: (end - start + 1) as f64 * cfg.window_step_s,
    })
}

/// Food gathering duration in seconds; zero when no strong pick-food window
/// precedes the mouth.
pub fn gathering_duration(
    windows: &[MicromovementWindow],
    mouth_idx: usize,
    cfg: &BehavioralConfig,
) -> f64 {
    gathering_run(windows, mouth_idx, cfg).map_or(0.0, |r| r.duration_s)
}

/// Maximal block of argmax-`u` windows ending right before the mouth window
/// (and after the gathering run, when there is one); its variance is measured
/// on the bite samples the windows cover.
pub fn transport_segment(
    windows: &[MicromovementWindow],
    run: Option<&GatheringRun>,
    mouth_idx: usize,
    bite: &ImuStream,
    cfg: &BehavioralConfig,
) -> Result<TransportSegment> {
    let floor = run.map_or(0, |r| r.end_window + 1);
    if mouth_idx == 0 || mouth_idx > windows.len() || mouth_idx <= floor {
        return Err(Error::EmptyTransport);
    }
    let end = mouth_idx - 1;
    if windows[end].argmax() != Gesture::U {
        return Err(Error::EmptyTransport);
    }
    let mut start = end;
    while start > floor && windows[start - 1].argmax() == Gesture::U {
        start -= 1;
    }

    let fs = bite.fs();
    let lo = (start as f64 * cfg.window_step_s * fs).round() as usize;
    let hi = ((end as f64 * cfg.window_step_s + cfg.window_len_s) * fs).round() as usize;
    let hi = hi.min(bite.len());
    if lo >= hi {
        return Err(Error::EmptyTransport);
    }
    let span = &bite.samples()[lo..hi];
    let v_raw = Channel::ALL
        .iter()
        .map(|&ch| population_variance(span.iter().map(|s| s.get(ch))))
        .sum::<f64>()
        / 6.0;
    Ok(TransportSegment::new(start, end, v_raw, cfg))
}

/// `(1 - v_norm) + ln(d_norm + 1)`.
pub fn stillness_score(segment: &TransportSegment) -> f64 {
    (1.0 - segment.v_norm) + segment.d_norm.ln_1p()
}

/// The two behavioral features of one bite: `(f1, f2)`.
pub fn behavioral_features(
    windows: &[MicromovementWindow],
    bite: &ImuStream,
    cfg: &BehavioralConfig,
) -> Result<(f64, f64)> {
    let mouth = first_mouth_window(windows)?;
    let run = gathering_run(windows, mouth, cfg);
    let f1 = run.map_or(0.0, |r| r.duration_s);
    let f2 = match transport_segment(windows, run.as_ref(), mouth, bite, cfg) {
        Ok(seg) => stillness_score(&seg),
        Err(Error::EmptyTransport) => 0.0,
        Err(e) => return Err(e),
    };
    Ok((f1, f2))
}
