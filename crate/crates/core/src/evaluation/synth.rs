//! Deterministic synthetic meals for desk-scale validation.
//!
//! Each subject gets one session of annotated bites. Weights follow a
//! truncated normal; each bite is laid out as micromovement phases
//! (pick food, upward transport, mouth, downward) on a 0.1 s frame grid, and
//! IMU motion is synthesized per phase on top of gravity and sensor noise.
//! `coupling` controls how strongly the gathering length, the transport
//! length and the transport steadiness follow the bite weight; at zero they
//! are independent of it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::io::RawSession;
use crate::model::{BiteAnnotation, Gesture, ImuSample, ImuStream, MicromovementWindow, Session, Wrist};

const GRAVITY: f64 = 9.81;
const FRAME_S: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthProfile {
    pub bites_per_session: usize,
    /// Fraction of the nominal session length that is actually generated.
    pub desk_scale: f64,
    pub session_minutes_mean: f64,
    pub session_minutes_std: f64,
    pub bite_duration_mean_s: f64,
    pub bite_duration_std_s: f64,
    pub bite_duration_min_s: f64,
    pub bite_duration_max_s: f64,
    pub weight_mean_g: f64,
    pub weight_std_g: f64,
    pub weight_min_g: f64,
    pub weight_max_g: f64,
    pub fs_mean_hz: f64,
    pub fs_std_hz: f64,
    /// Strength of the weight-to-behavior link, 0 = none.
    pub coupling: f64,
    /// Scale of the weight-independent behavioral noise.
    pub noise: f64,
    pub left_wrist_fraction: f64,
    /// Probability that the classifier misses a bite's mouth event.
    pub missed_mouth_rate: f64,
    /// Still period before the first and after the last bite.
    pub lead_s: f64,
    pub max_sync_offset_s: f64,
}

impl Default for SynthProfile {
    fn default() -> Self {
        Self {
            bites_per_session: 30,
            desk_scale: 0.2,
            session_minutes_mean: 23.42,
            session_minutes_std: 12.15,
            bite_duration_mean_s: 6.45,
            bite_duration_std_s: 3.41,
            bite_duration_min_s: 1.61,
            bite_duration_max_s: 27.19,
            weight_mean_g: 10.89,
            weight_std_g: 6.04,
            weight_min_g: 0.0,
            weight_max_g: 34.0,
            fs_mean_hz: 51.84,
            fs_std_hz: 1.08,
            coupling: 1.0,
            noise: 1.0,
            left_wrist_fraction: 0.2,
            missed_mouth_rate: 0.02,
            lead_s: 20.0,
            max_sync_offset_s: 1.0,
        }
    }
}

impl SynthProfile {
    fn validate(&self, subjects: usize) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidProfile(msg.to_owned()));
        if subjects < 2 {
            return bad("at least 2 subjects are required");
        }
        if self.bites_per_session == 0 {
            return bad("bites_per_session must be positive");
        }
        let finite = [
            self.desk_scale,
            self.session_minutes_mean,
            self.session_minutes_std,
            self.bite_duration_mean_s,
            self.bite_duration_std_s,
            self.weight_mean_g,
            self.weight_std_g,
            self.fs_mean_hz,
            self.fs_std_hz,
            self.coupling,
            self.noise,
            self.lead_s,
            self.max_sync_offset_s,
        ];
        if finite.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return bad("numeric parameters must be finite and non-negative");
        }
        if !(self.weight_min_g >= 0.0 && self.weight_min_g < self.weight_max_g) {
            return bad("weight range must satisfy 0 <= min < max");
        }
        if !(self.bite_duration_min_s > 0.0 && self.bite_duration_min_s < self.bite_duration_max_s) {
            return bad("bite duration range must satisfy 0 < min < max");
        }
        if self.fs_mean_hz < 20.0 {
            return bad("raw sampling rate must be at least 20 Hz");
        }
        if self.lead_s < 16.0 {
            return bad("lead_s must be at least 16 s so sessions survive edge padding");
        }
        if !(0.0..=1.0).contains(&self.left_wrist_fraction) || !(0.0..=1.0).contains(&self.missed_mouth_rate) {
            return bad("fractions must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Rejection-sampled normal restricted to `[lo, hi]`.
fn truncated_normal<R: Rng>(rng: &mut R, mean: f64, std: f64, lo: f64, hi: f64) -> f64 {
    if std == 0.0 {
        return mean.clamp(lo, hi);
    }
    let dist = Normal::new(mean, std).expect("std validated");
    for _ in 0..10_000 {
        let v = dist.sample(rng);
        if (lo..=hi).contains(&v) {
            return v;
        }
    }
    mean.clamp(lo, hi)
}

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Phase of one 0.1 s frame on the session timeline.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Idle,
    Gather,
    Transport,
    Mouth,
    Down,
}

/// Contiguous stretch of frames sharing a phase and motion amplitude.
#[derive(Debug, Clone)]
struct Segment {
    t0: f64,
    t1: f64,
    /// Per-channel sinusoid amplitude.
    amp: [f64; 6],
    freqs: [f64; 2],
    phases: [[f64; 2]; 6],
}

impl Segment {
    fn value(&self, t: f64, ch: usize) -> f64 {
        let ramp = 0.1f64.min(0.5 * (self.t1 - self.t0));
        let edge = (t - self.t0).min(self.t1 - t);
        let env = if edge <= 0.0 {
            0.0
        } else if edge < ramp {
            0.5 - 0.5 * (PI * edge / ramp).cos()
        } else {
            1.0
        };
        let a = self.amp[ch];
        env * a
            * self
                .freqs
                .iter()
                .zip(&self.phases[ch])
                .map(|(f, ph)| (2.0 * PI * f * t + ph).sin())
                .sum::<f64>()
    }
}

struct BitePlan {
    start_frame: usize,
    end_frame: usize,
    weight_g: f64,
}

struct Timeline {
    frames: Vec<Phase>,
    segments: Vec<Segment>,
    bites: Vec<BitePlan>,
    missed_mouth: Vec<bool>,
}

fn motion_segment<R: Rng>(rng: &mut R, t0: f64, t1: f64, amp: [f64; 6], freqs: [f64; 2]) -> Segment {
    let mut phases = [[0.0; 2]; 6];
    for ph in phases.iter_mut().flatten() {
        *ph = rng.random_range(0.0..2.0 * PI);
    }
    Segment {
        t0,
        t1,
        amp,
        freqs,
        phases,
    }
}

fn plan_session<R: Rng>(rng: &mut R, p: &SynthProfile) -> Timeline {
    let session_s = truncated_normal(
        rng,
        p.session_minutes_mean,
        p.session_minutes_std,
        p.session_minutes_mean * 0.2,
        p.session_minutes_mean * 3.0,
    ) * 60.0
        * p.desk_scale;
    let n = p.bites_per_session;
    let gap_mean_s = ((session_s - n as f64 * p.bite_duration_mean_s) / n as f64).max(1.0);

    let lead_frames = (p.lead_s / FRAME_S).round() as usize;
    let mut frames = vec![Phase::Idle; lead_frames];
    let mut segments = Vec::new();
    let mut bites = Vec::new();
    let mut missed_mouth = Vec::new();

    for i in 0..n {
        if i > 0 {
            let gap_s = rng.random_range(0.5 * gap_mean_s..1.5 * gap_mean_s).max(1.0);
            frames.extend(std::iter::repeat_n(Phase::Idle, (gap_s / FRAME_S).round() as usize));
        }
        let weight_g = truncated_normal(rng, p.weight_mean_g, p.weight_std_g, p.weight_min_g, p.weight_max_g);
        let z = if p.weight_std_g > 0.0 {
            (weight_g - p.weight_mean_g) / p.weight_std_g
        } else {
            0.0
        };
        let (c, s) = (p.coupling, p.noise);
        let frames_of = |v: f64, lo: f64, hi: f64| v.round().clamp(lo, hi) as usize;
        let pre = rng.random_range(1..=3usize);
        let gather = frames_of(14.0 + c * 5.0 * z + s * 2.0 * gauss(rng), 3.0, 60.0);
        let transport = frames_of(12.0 + c * 7.0 * z + s * 3.0 * gauss(rng), 3.0, 40.0);
        let v_target = (5.0 - c * 2.2 * z + s * 0.8 * gauss(rng)).clamp(1.2, 9.5);
        let mouth = rng.random_range(4..=8usize);
        let duration_s = truncated_normal(
            rng,
            p.bite_duration_mean_s,
            p.bite_duration_std_s,
            p.bite_duration_min_s,
            p.bite_duration_max_s,
        );
        let needed = pre + gather + transport + mouth + 5;
        let total = ((duration_s / FRAME_S).round() as usize).max(needed);
        let down = total - (pre + gather + transport + mouth);

        let start_frame = frames.len();
        let t = |f: usize| f as f64 * FRAME_S;
        frames.extend(std::iter::repeat_n(Phase::Idle, pre));
        let g0 = frames.len();
        frames.extend(std::iter::repeat_n(Phase::Gather, gather));
        let u0 = frames.len();
        frames.extend(std::iter::repeat_n(Phase::Transport, transport));
        let m0 = frames.len();
        frames.extend(std::iter::repeat_n(Phase::Mouth, mouth));
        let d0 = frames.len();
        frames.extend(std::iter::repeat_n(Phase::Down, down));
        let end_frame = frames.len();

        let a = v_target.sqrt();
        segments.push(motion_segment(rng, t(g0), t(u0), [1.2, 1.2, 1.2, 1.0, 1.0, 1.0], [2.1, 3.3]));
        segments.push(motion_segment(rng, t(u0), t(m0), [a; 6], [2.4, 3.7]));
        segments.push(motion_segment(rng, t(m0), t(d0), [0.3; 6], [1.9, 2.6]));
        segments.push(motion_segment(rng, t(d0), t(end_frame), [1.5, 1.5, 1.5, 1.2, 1.2, 1.2], [1.7, 2.9]));
        bites.push(BitePlan {
            start_frame,
            end_frame,
            weight_g,
        });
        missed_mouth.push(rng.random_bool(p.missed_mouth_rate));
    }
    frames.extend(std::iter::repeat_n(Phase::Idle, lead_frames));
    Timeline {
        frames,
        segments,
        bites,
        missed_mouth,
    }
}

/// Probability row with `dominant` holding `share` and the rest spread
/// randomly over the other classes.
fn prob_row<R: Rng>(rng: &mut R, dominant: Gesture, share: f64) -> [f64; 5] {
    let mut probs = [0.0; 5];
    let weights: Vec<f64> = (0..4).map(|_| rng.random_range(0.05..1.0)).collect();
    let wsum: f64 = weights.iter().sum();
    let mut others = Gesture::ALL.iter().filter(|&&g| g != dominant);
    for w in &weights {
        let g = others.next().expect("four other classes");
        probs[g.index()] = (1.0 - share) * w / wsum;
    }
    probs[dominant.index()] = share;
    probs
}

fn dominant_row<R: Rng>(rng: &mut R, dominant: Gesture, lo: f64, hi: f64) -> [f64; 5] {
    let share = rng.random_range(lo..hi);
    prob_row(rng, dominant, share)
}

fn micromovements<R: Rng>(rng: &mut R, tl: &Timeline) -> Vec<MicromovementWindow> {
    let mut bite_of_frame = vec![None; tl.frames.len()];
    for (b, plan) in tl.bites.iter().enumerate() {
        bite_of_frame[plan.start_frame..plan.end_frame].fill(Some(b));
    }
    tl.frames
        .iter()
        .enumerate()
        .take(tl.frames.len().saturating_sub(1))
        .map(|(k, &phase)| {
            let missed = bite_of_frame[k].is_some_and(|b| tl.missed_mouth[b]);
            let probs = match phase {
                Phase::Gather if rng.random_bool(0.08) => {
                    let dip = rng.random_range(0.30..0.44);
                    let mut row = prob_row(rng, Gesture::N, 0.5);
                    let scale = (1.0 - dip) / (1.0 - row[Gesture::P.index()]);
                    row.iter_mut().for_each(|v| *v *= scale);
                    row[Gesture::P.index()] = dip;
                    row
                }
                Phase::Gather => dominant_row(rng, Gesture::P, 0.55, 0.95),
                Phase::Transport => dominant_row(rng, Gesture::U, 0.6, 0.95),
                Phase::Mouth if missed => dominant_row(rng, Gesture::U, 0.6, 0.95),
                Phase::Mouth => dominant_row(rng, Gesture::M, 0.6, 0.95),
                Phase::Down => dominant_row(rng, Gesture::D, 0.6, 0.95),
                Phase::Idle => dominant_row(rng, Gesture::N, 0.6, 0.95),
            };
            MicromovementWindow::new(k, k as f64 * FRAME_S, probs)
        })
        .collect()
}

fn imu_stream<R: Rng>(rng: &mut R, tl: &Timeline, fs: f64, wrist: Wrist) -> ImuStream {
    let t_end = tl.frames.len() as f64 * FRAME_S;
    let wobble = [rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI)];
    let noise = Normal::new(0.0, 0.02).expect("valid std");
    let mut samples = Vec::with_capacity((t_end * fs) as usize + 2);
    let mut seg = 0;
    let mut t = 0.0;
    while t <= t_end {
        while seg < tl.segments.len() && tl.segments[seg].t1 <= t {
            seg += 1;
        }
        let mut v = [0.0; 6];
        v[0] = 0.3 * (2.0 * PI * 0.2 * t + wobble[0]).sin();
        v[1] = 0.3 * (2.0 * PI * 0.15 * t + wobble[1]).sin();
        v[2] = GRAVITY;
        if let Some(s) = tl.segments.get(seg).filter(|s| s.t0 <= t) {
            for (ch, x) in v.iter_mut().enumerate() {
                *x += s.value(t, ch);
            }
        }
        for x in &mut v {
            *x += noise.sample(rng);
        }
        if wrist == Wrist::Left {
            v[0] = -v[0];
            v[4] = -v[4];
            v[5] = -v[5];
        }
        samples.push(ImuSample::new(t, v));
        t += (1.0 + rng.random_range(-0.05..0.05)) / fs;
    }
    ImuStream::with_estimated_rate(samples, wrist).expect("generated times are increasing")
}

/// Sessions as they would be stored on disk (recording clock).
pub fn generate_synthetic_raw(subjects: usize, seed: u64, profile: &SynthProfile) -> Result<Vec<RawSession>> {
    profile.validate(subjects)?;
    (0..subjects)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let wrist = if rng.random_bool(profile.left_wrist_fraction) {
                Wrist::Left
            } else {
                Wrist::Right
            };
            let fs = truncated_normal(
                &mut rng,
                profile.fs_mean_hz,
                profile.fs_std_hz,
                profile.fs_mean_hz * 0.8,
                profile.fs_mean_hz * 1.2,
            );
            let offset = rng.random_range(0.0..=profile.max_sync_offset_s);
            let tl = plan_session(&mut rng, profile);
            let micro = micromovements(&mut rng, &tl);
            let imu = imu_stream(&mut rng, &tl, fs, wrist);
            let bites = tl
                .bites
                .iter()
                .enumerate()
                .map(|(b, plan)| {
                    BiteAnnotation::new(
                        format!("b{:03}", b + 1),
                        plan.start_frame as f64 * FRAME_S + offset,
                        plan.end_frame as f64 * FRAME_S + offset,
                        plan.weight_g,
                    )
                })
                .collect();
            Ok(RawSession {
                subject_id: format!("S{:02}", i + 1),
                session_id: "meal1".into(),
                imu,
                micromovements: micro,
                bites,
                sync_offset_s: offset,
            })
        })
        .collect()
}

/// Aligned, validated synthetic sessions (same content as
/// [`generate_synthetic_raw`] after loading).
pub fn generate_synthetic(subjects: usize, seed: u64, profile: &SynthProfile) -> Result<Vec<Session>> {
    generate_synthetic_raw(subjects, seed, profile)?
        .into_iter()
        .map(RawSession::into_session)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let a = generate_synthetic(3, 7, &SynthProfile::default()).unwrap();
        let b = generate_synthetic(3, 7, &SynthProfile::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|s| s.bites.len() == 30));
        let c = generate_synthetic(3, 8, &SynthProfile::default()).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_profile() {
        assert!(matches!(
            generate_synthetic(1, 7, &SynthProfile::default()),
            Err(Error::InvalidProfile(_))
        ));
        let p = SynthProfile {
            weight_min_g: 40.0,
            ..SynthProfile::default()
        };
        assert!(matches!(generate_synthetic(3, 7, &p), Err(Error::InvalidProfile(_))));
    }
}
