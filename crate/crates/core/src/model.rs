//! Domain types shared by every stage: IMU streams, micromovement windows,
//! bite annotations and sessions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step between consecutive micromovement windows, in seconds.
pub const MICRO_STEP_S: f64 = 0.1;
/// Span covered by one micromovement window, in seconds.
pub const MICRO_WINDOW_S: f64 = 0.2;

/// Slack used for closed-interval time comparisons.
pub(crate) const TIME_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Wrist {
    Left,
    Right,
}

impl FromStr for Wrist {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Ok(Wrist::Left),
            "right" => Ok(Wrist::Right),
            other => Err(format!("unknown wrist `{other}`")),
        }
    }
}

/// The six IMU channels in matrix column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Ax,
    Ay,
    Az,
    Gx,
    Gy,
    Gz,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::Ax,
        Channel::Ay,
        Channel::Az,
        Channel::Gx,
        Channel::Gy,
        Channel::Gz,
    ];
    pub const ACCEL: [Channel; 3] = [Channel::Ax, Channel::Ay, Channel::Az];
    pub const GYRO: [Channel; 3] = [Channel::Gx, Channel::Gy, Channel::Gz];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["ax", "ay", "az", "gx", "gy", "gz"][self.index()]
    }
}

/// One synchronized accelerometer (m/s²) + gyroscope (rad/s) reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Seconds since session start.
    pub t: f64,
    /// `[ax, ay, az, gx, gy, gz]`.
    pub values: [f64; 6],
}

impl ImuSample {
    pub fn new(t: f64, values: [f64; 6]) -> Self {
        Self { t, values }
    }

    pub fn get(&self, ch: Channel) -> f64 {
        self.values[ch.index()]
    }

    fn check(&self) -> Result<()> {
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(Error::InvariantViolation(format!(
                "sample time {} is not a finite non-negative number",
                self.t
            )));
        }
        if let Some(v) = self.values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvariantViolation(format!(
                "non-finite channel value {v} at t = {}",
                self.t
            )));
        }
        Ok(())
    }
}

/// The `N x 6` IMU matrix with its time axis and sampling metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ImuStream {
    samples: Vec<ImuSample>,
    fs: f64,
    wrist: Wrist,
}

impl ImuStream {
    /// Validates sample invariants (finite, non-negative, strictly increasing
    /// times).
    pub fn new(samples: Vec<ImuSample>, fs: f64, wrist: Wrist) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvariantViolation(format!(
                "sampling rate {fs} must be positive"
            )));
        }
        for s in &samples {
            s.check()?;
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].t <= w[0].t) {
            return Err(Error::InvariantViolation(format!(
                "sample times not strictly increasing at t = {}",
                w[1].t
            )));
        }
        Ok(Self { samples, fs, wrist })
    }

    /// Builds a stream whose nominal rate is estimated from the time axis.
    pub fn with_estimated_rate(samples: Vec<ImuSample>, wrist: Wrist) -> Result<Self> {
        let fs = estimate_rate(&samples).unwrap_or(1.0);
        Self::new(samples, fs, wrist)
    }

    pub(crate) fn from_parts_unchecked(samples: Vec<ImuSample>, fs: f64, wrist: Wrist) -> Self {
        Self { samples, fs, wrist }
    }

    pub fn samples(&self) -> &[ImuSample] {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn wrist(&self) -> Wrist {
        self.wrist
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn channel(&self, ch: Channel) -> Vec<f64> {
        self.samples.iter().map(|s| s.get(ch)).collect()
    }

    /// Replaces one channel; `values` must have the stream's length.
    pub fn set_channel(&mut self, ch: Channel, values: &[f64]) {
        assert_eq!(values.len(), self.samples.len(), "channel length mismatch");
        for (s, &v) in self.samples.iter_mut().zip(values) {
            s.values[ch.index()] = v;
        }
    }

    pub fn with_wrist(mut self, wrist: Wrist) -> Self {
        self.wrist = wrist;
        self
    }

    /// `(first, last)` sample time.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.samples.first()?.t, self.samples.last()?.t))
    }

    pub fn duration(&self) -> f64 {
        self.span().map_or(0.0, |(a, b)| b - a)
    }

    /// Shifts all timestamps by `offset` seconds.
    pub fn shifted(mut self, offset: f64) -> Result<Self> {
        for s in &mut self.samples {
            s.t += offset;
        }
        Self::new(self.samples, self.fs, self.wrist)
    }

    /// Sub-stream of samples `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> ImuStream {
        ImuStream::from_parts_unchecked(self.samples[start..end].to_vec(), self.fs, self.wrist)
    }
}

fn estimate_rate(samples: &[ImuSample]) -> Option<f64> {
    let (first, last) = (samples.first()?, samples.last()?);
    let dt = last.t - first.t;
    (samples.len() >= 2 && dt > 0.0).then(|| (samples.len() - 1) as f64 / dt)
}

/// Micromovement classes emitted by the upstream gesture classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gesture {
    /// Pick food.
    P,
    /// Upward movement.
    U,
    /// Mouth.
    M,
    /// Downward movement.
    D,
    /// No movement.
    N,
}

impl Gesture {
    pub const ALL: [Gesture; 5] = [Gesture::P, Gesture::U, Gesture::M, Gesture::D, Gesture::N];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Order in which tied probabilities are resolved.
const ARGMAX_PRIORITY: [Gesture; 5] = [Gesture::M, Gesture::U, Gesture::P, Gesture::D, Gesture::N];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicromovementWindow {
    pub index: usize,
    pub t_start: f64,
    /// Probabilities for `(p, u, m, d, n)`.
    pub probs: [f64; 5],
}

impl MicromovementWindow {
    pub fn new(index: usize, t_start: f64, probs: [f64; 5]) -> Self {
        Self {
            index,
            t_start,
            probs,
        }
    }

    pub fn prob(&self, g: Gesture) -> f64 {
        self.probs[g.index()]
    }

    /// Most probable class. Exact ties prefer `m`, then `u`, `p`, `d`, `n`.
    pub fn argmax(&self) -> Gesture {
        let mut best = ARGMAX_PRIORITY[0];
        for &g in &ARGMAX_PRIORITY[1..] {
            if self.prob(g) > self.prob(best) {
                best = g;
            }
        }
        best
    }

    fn check(&self) -> Result<()> {
        if !self.t_start.is_finite() {
            return Err(Error::InvariantViolation(format!(
                "window {} has non-finite start time",
                self.index
            )));
        }
        if self.probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvariantViolation(format!(
                "window {} has a probability outside [0, 1]",
                self.index
            )));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > 1e-3 {
            return Err(Error::InvariantViolation(format!(
                "window {} probabilities sum to {sum}",
                self.index
            )));
        }
        Ok(())
    }
}

/// Checks per-window probabilities and the fixed window cadence.
pub fn validate_micromovements(windows: &[MicromovementWindow]) -> Result<()> {
    for w in windows {
        w.check()?;
    }
    for pair in windows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.index != a.index + 1 {
            return Err(Error::InvariantViolation(format!(
                "micromovement window index {} follows {}",
                b.index, a.index
            )));
        }
        if ((b.t_start - a.t_start) - MICRO_STEP_S).abs() > 1e-6 {
            return Err(Error::InvariantViolation(format!(
                "micromovement windows {} and {} are not {MICRO_STEP_S} s apart",
                a.index, b.index
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiteAnnotation {
    pub bite_id: String,
    pub start_s: f64,
    pub end_s: f64,
    /// Ground-truth weight in grams.
    pub weight_g: f64,
}

impl BiteAnnotation {
    pub fn new(bite_id: impl Into<String>, start_s: f64, end_s: f64, weight_g: f64) -> Self {
        Self {
            bite_id: bite_id.into(),
            start_s,
            end_s,
            weight_g,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end_s - self.start_s
    }

    fn check(&self) -> Result<()> {
        if !(self.start_s.is_finite() && self.end_s.is_finite() && self.start_s < self.end_s) {
            return Err(Error::InvariantViolation(format!(
                "bite `{}` has start {} not before end {}",
                self.bite_id, self.start_s, self.end_s
            )));
        }
        if !(self.weight_g.is_finite() && self.weight_g >= 0.0) {
            return Err(Error::InvariantViolation(format!(
                "bite `{}` has invalid weight {}",
                self.bite_id, self.weight_g
            )));
        }
        Ok(())
    }
}

/// Globally unique bite identity: `subject/session/bite`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BiteKey {
    pub subject: String,
    pub session: String,
    pub bite: String,
}

impl BiteKey {
    pub fn new(subject: &str, session: &str, bite: &str) -> Self {
        Self {
            subject: subject.to_owned(),
            session: session.to_owned(),
            bite: bite.to_owned(),
        }
    }
}

impl fmt::Display for BiteKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.subject, self.session, self.bite)
    }
}

impl FromStr for BiteKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.splitn(3, '/');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c)) => Ok(BiteKey::new(a, b, c)),
            _ => Err(format!("malformed bite key `{s}`")),
        }
    }
}

impl Serialize for BiteKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BiteKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One recorded meal of one subject. Timestamps of the IMU stream and the
/// micromovement windows are on the annotation clock (sync offset applied).
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub subject_id: String,
    pub session_id: String,
    pub imu: ImuStream,
    pub micromovements: Vec<MicromovementWindow>,
    pub bites: Vec<BiteAnnotation>,
    pub sync_offset_s: f64,
}

impl Session {
    /// Assembles a session from already-aligned parts and validates it.
    pub fn new(
        subject_id: impl Into<String>,
        session_id: impl Into<String>,
        imu: ImuStream,
        micromovements: Vec<MicromovementWindow>,
        bites: Vec<BiteAnnotation>,
        sync_offset_s: f64,
    ) -> Result<Self> {
        let s = Self {
            subject_id: subject_id.into(),
            session_id: session_id.into(),
            imu,
            micromovements,
            bites,
            sync_offset_s,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        validate_micromovements(&self.micromovements)?;
        for b in &self.bites {
            b.check()?;
        }
        for pair in self.bites.windows(2) {
            if pair[1].start_s < pair[0].end_s {
                return Err(Error::InvariantViolation(format!(
                    "bites `{}` and `{}` overlap or are out of order",
                    pair[0].bite_id, pair[1].bite_id
                )));
            }
        }
        let mut ids: Vec<&str> = self.bites.iter().map(|b| b.bite_id.as_str()).collect();
        ids.sort_unstable();
        if let Some(d) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvariantViolation(format!("duplicate bite id `{}`", d[0])));
        }
        if !self.bites.is_empty() {
            let (t0, t1) = self.imu.span().ok_or_else(|| {
                Error::InvariantViolation("session with bites has an empty IMU stream".into())
            })?;
            for b in &self.bites {
                if b.start_s < t0 - TIME_TOL || b.end_s > t1 + TIME_TOL {
                    return Err(Error::InvariantViolation(format!(
                        "bite `{}` [{}, {}] lies outside the IMU span [{t0}, {t1}]",
                        b.bite_id, b.start_s, b.end_s
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn bite(&self, bite_id: &str) -> Result<&BiteAnnotation> {
        self.bites
            .iter()
            .find(|b| b.bite_id == bite_id)
            .ok_or_else(|| Error::UnknownBite(bite_id.to_owned()))
    }

    pub fn bite_key(&self, bite: &BiteAnnotation) -> BiteKey {
        BiteKey::new(&self.subject_id, &self.session_id, &bite.bite_id)
    }

    /// Index range of IMU samples with `start_s <= t <= end_s`.
    pub fn bite_sample_range(&self, bite: &BiteAnnotation) -> std::ops::Range<usize> {
        let samples = self.imu.samples();
        let lo = samples.partition_point(|s| s.t < bite.start_s - TIME_TOL);
        let hi = samples.partition_point(|s| s.t <= bite.end_s + TIME_TOL);
        lo..hi.max(lo)
    }

    /// IMU samples inside the closed bite interval and the micromovement
    /// windows whose span intersects it, both re-indexed from zero.
    pub fn slice_bite(&self, bite_id: &str) -> Result<(ImuStream, Vec<MicromovementWindow>)> {
        let bite = self.bite(bite_id)?;
        let range = self.bite_sample_range(bite);
        let imu = self.imu.slice(range.start, range.end);
        let windows = self
            .micromovements
            .iter()
            .filter(|w| {
                w.t_start + MICRO_WINDOW_S >= bite.start_s - TIME_TOL
                    && w.t_start <= bite.end_s + TIME_TOL
            })
            .enumerate()
            .map(|(i, w)| MicromovementWindow::new(i, w.t_start, w.probs))
            .collect();
        Ok((imu, windows))
    }
}
