//! Signal conditioning: uniform resampling, zero-phase high-pass FIR on the
//! accelerometer, median smoothing and left-to-right hand mirroring.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::config::PreprocessConfig;
use crate::error::{Error, Result};
use crate::model::{Channel, ImuSample, ImuStream, Session, Wrist};

/// Linear-phase FIR filter.
#[derive(Debug, Clone, PartialEq)]
pub struct FirFilter {
    taps: Vec<f64>,
    cutoff_hz: f64,
    fs: f64,
}

impl FirFilter {
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn cutoff_hz(&self) -> f64 {
        self.cutoff_hz
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Magnitude of the frequency response at `freq_hz`.
    pub fn gain_at(&self, freq_hz: f64) -> f64 {
        let omega = 2.0 * PI * freq_hz / self.fs;
        let (re, im) = self
            .taps
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(re, im), (k, &h)| {
                let a = omega * k as f64;
                (re + h * a.cos(), im - h * a.sin())
            });
        re.hypot(im)
    }

    /// Causal convolution with zero initial state.
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let h = &self.taps;
        (0..x.len())
            .map(|n| {
                let k_max = n.min(h.len() - 1);
                // y[n] = sum_k h[k] x[n - k]
                h[..=k_max]
                    .iter()
                    .zip(x[n - k_max..=n].iter().rev())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }
}

/// Resamples every channel onto a uniform `target_hz` grid spanning the
/// first to last input time, by linear interpolation.
pub fn resample_linear(stream: &ImuStream, target_hz: f64) -> Result<ImuStream> {
    if !(target_hz.is_finite() && target_hz > 0.0) {
        return Err(Error::InvalidParams(format!("target rate {target_hz} must be positive")));
    }
    let src = stream.samples();
    if src.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: src.len(),
        });
    }
    let t0 = src[0].t;
    let t_last = src[src.len() - 1].t;
    let count = ((t_last - t0) * target_hz + 1e-9).floor() as usize + 1;
    let out = (0..count)
        .map(|k| {
            let t = (t0 + k as f64 / target_hz).min(t_last);
            // first input index with time > t, clamped to a valid bracket
            let hi = src.partition_point(|s| s.t <= t).clamp(1, src.len() - 1);
            let (a, b) = (&src[hi - 1], &src[hi]);
            let alpha = (t - a.t) / (b.t - a.t);
            let mut values = [0.0; 6];
            for (c, v) in values.iter_mut().enumerate() {
                *v = a.values[c] + alpha * (b.values[c] - a.values[c]);
            }
            ImuSample::new(t, values)
        })
        .collect();
    Ok(ImuStream::from_parts_unchecked(out, target_hz, stream.wrist()))
}

/// Windowed-sinc high-pass: a Hamming-windowed low-pass with unit DC gain,
/// spectrally inverted.
pub fn design_highpass(cutoff_hz: f64, num_taps: usize, fs: f64) -> Result<FirFilter> {
    if num_taps % 2 == 0 || num_taps < 3 {
        return Err(Error::InvalidParams(format!(
            "number of taps must be odd and at least 3, got {num_taps}"
        )));
    }
    if !(fs > 0.0 && cutoff_hz > 0.0 && cutoff_hz < fs / 2.0) {
        return Err(Error::InvalidParams(format!(
            "cutoff {cutoff_hz} Hz must lie in (0, {}) Hz",
            fs / 2.0
        )));
    }
    let m = (num_taps - 1) as f64;
    let center = (num_taps - 1) / 2;
    let fc = cutoff_hz / fs;
    let mut lowpass: Vec<f64> = (0..num_taps)
        .map(|i| {
            let x = i as f64 - m / 2.0;
            let sinc = if i == center {
                2.0 * fc
            } else {
                (2.0 * PI * fc * x).sin() / (PI * x)
            };
            let window = 0.54 - 0.46 * (2.0 * PI * i as f64 / m).cos();
            sinc * window
        })
        .collect();
    let dc: f64 = lowpass.iter().sum();
    lowpass.iter_mut().for_each(|h| *h /= dc);
    // mirror-average to make the taps exactly symmetric
    for i in 0..center {
        let avg = 0.5 * (lowpass[i] + lowpass[num_taps - 1 - i]);
        lowpass[i] = avg;
        lowpass[num_taps - 1 - i] = avg;
    }
    let mut taps: Vec<f64> = lowpass.iter().map(|h| -h).collect();
    let off_center: f64 = taps
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != center)
        .map(|(_, h)| h)
        .sum();
    taps[center] = -off_center;
    Ok(FirFilter {
        taps,
        cutoff_hz,
        fs,
    })
}

/// Edge padding length used by [`filtfilt`].
pub fn filtfilt_padlen(filter: &FirFilter) -> usize {
    3 * (filter.len() - 1)
}

/// Zero-phase filtering of one sequence: odd-reflection padding, forward
/// pass, backward pass, trim.
pub fn filtfilt_signal(filter: &FirFilter, x: &[f64]) -> Result<Vec<f64>> {
    let pad = filtfilt_padlen(filter);
    if x.len() <= pad {
        return Err(Error::StreamTooShort {
            len: x.len(),
            needed: pad,
        });
    }
    let n = x.len();
    let (first, last) = (x[0], x[n - 1]);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * first - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * last - x[n - 1 - i]));

    let mut y = filter.apply(&ext);
    y.reverse();
    let mut y = filter.apply(&y);
    y.reverse();
    Ok(y[pad..pad + n].to_vec())
}

/// Applies [`filtfilt_signal`] to the selected channels; the rest pass
/// through unchanged.
pub fn filtfilt(filter: &FirFilter, stream: &ImuStream, channels: &[Channel]) -> Result<ImuStream> {
    let filtered: Vec<(Channel, Vec<f64>)> = channels
        .par_iter()
        .map(|&ch| filtfilt_signal(filter, &stream.channel(ch)).map(|v| (ch, v)))
        .collect::<Result<_>>()?;
    let mut out = stream.clone();
    for (ch, v) in filtered {
        out.set_channel(ch, &v);
    }
    Ok(out)
}

/// Centered running median; near the edges the window shrinks symmetrically
/// so it stays centered.
pub fn median_signal(x: &[f64], order: usize) -> Result<Vec<f64>> {
    if order == 0 || order % 2 == 0 {
        return Err(Error::InvalidOrder(order));
    }
    let half = order / 2;
    let n = x.len();
    let mut buf = Vec::with_capacity(order);
    Ok((0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            buf.clear();
            buf.extend_from_slice(&x[i - h..=i + h]);
            buf.sort_unstable_by(f64::total_cmp);
            buf[h]
        })
        .collect())
}

pub fn median_filter(stream: &ImuStream, order: usize) -> Result<ImuStream> {
    let filtered: Vec<Vec<f64>> = Channel::ALL
        .par_iter()
        .map(|&ch| median_signal(&stream.channel(ch), order))
        .collect::<Result<_>>()?;
    let mut out = stream.clone();
    for (ch, v) in Channel::ALL.iter().zip(&filtered) {
        out.set_channel(*ch, v);
    }
    Ok(out)
}

/// Outcome of [`mirror_hand`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorOutcome {
    Mirrored,
    /// Input was already right-wrist; returned unchanged.
    AlreadyRight,
}

pub const MIRRORED_CHANNELS: [Channel; 3] = [Channel::Ax, Channel::Gy, Channel::Gz];

/// Maps a left-wrist recording to right-wrist orientation by negating
/// `ax`, `gy` and `gz`.
pub fn mirror_hand(stream: &ImuStream) -> (ImuStream, MirrorOutcome) {
    if stream.wrist() == Wrist::Right {
        log::warn!("mirror requested for a right-wrist stream; leaving it unchanged");
        return (stream.clone(), MirrorOutcome::AlreadyRight);
    }
    let samples = stream
        .samples()
        .iter()
        .map(|s| {
            let mut v = s.values;
            for ch in MIRRORED_CHANNELS {
                v[ch.index()] = -v[ch.index()];
            }
            ImuSample::new(s.t, v)
        })
        .collect();
    (
        ImuStream::from_parts_unchecked(samples, stream.fs(), Wrist::Right),
        MirrorOutcome::Mirrored,
    )
}

/// Full chain on a raw stream: resample, high-pass accelerometer, median on
/// all channels, mirror if left-worn.
pub fn preprocess_stream(stream: &ImuStream, cfg: &PreprocessConfig) -> Result<ImuStream> {
    let resampled = resample_linear(stream, cfg.target_hz)?;
    let hp = design_highpass(cfg.highpass_cutoff_hz, cfg.highpass_taps, cfg.target_hz)?;
    let filtered = filtfilt(&hp, &resampled, &Channel::ACCEL)?;
    let smoothed = median_filter(&filtered, cfg.median_order)?;
    Ok(match smoothed.wrist() {
        Wrist::Left => mirror_hand(&smoothed).0,
        Wrist::Right => smoothed,
    })
}

pub fn preprocess_session(session: &Session, cfg: &PreprocessConfig) -> Result<Session> {
    let imu = preprocess_stream(&session.imu, cfg)?;
    Ok(Session {
        imu,
        ..session.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream_from(times: &[f64], ch: &[f64], wrist: Wrist) -> ImuStream {
        let samples = times
            .iter()
            .zip(ch)
            .map(|(&t, &v)| ImuSample::new(t, [v; 6]))
            .collect();
        ImuStream::new(samples, 50.0, wrist).unwrap()
    }

    #[test]
    fn resample_reproduces_linear_data() {
        let s = stream_from(&[0.0, 0.02, 0.04], &[0.0, 1.0, 2.0], Wrist::Right);
        let r = resample_linear(&s, 100.0).unwrap();
        let t = r.times();
        let v = r.channel(Channel::Az);
        assert_eq!(t.len(), 5);
        for (k, (&ti, &vi)) in t.iter().zip(&v).enumerate() {
            assert!((ti - 0.01 * k as f64).abs() < 1e-12);
            assert!((vi - 0.5 * k as f64).abs() < 1e-12);
        }
        assert_eq!(r.fs(), 100.0);
    }

    #[test]
    fn resample_preserves_constant() {
        let times: Vec<f64> = (0..50).map(|i| i as f64 / 50.0).collect();
        let s = stream_from(&times, &[5.0; 50], Wrist::Right);
        let r = resample_linear(&s, 100.0).unwrap();
        assert!(r.channel(Channel::Gx).iter().all(|&v| v == 5.0));
    }

    #[test]
    fn resample_needs_two_samples() {
        let s = stream_from(&[0.0], &[1.0], Wrist::Right);
        assert!(matches!(resample_linear(&s, 100.0), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn highpass_properties() {
        let f = design_highpass(1.0, 501, 100.0).unwrap();
        assert_eq!(f.len(), 501);
        let t = f.taps();
        assert!((0..501).all(|i| t[i] == t[500 - i]));
        assert!(t.iter().sum::<f64>().abs() <= 1e-6);
        assert!((0.99..=1.01).contains(&f.gain_at(10.0)));
        assert!((0.98..=1.02).contains(&f.gain_at(5.0)));
    }

    #[test]
    fn highpass_rejects_bad_params() {
        assert!(matches!(design_highpass(1.0, 500, 100.0), Err(Error::InvalidParams(_))));
        assert!(matches!(design_highpass(60.0, 501, 100.0), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn filtfilt_too_short() {
        let f = design_highpass(1.0, 501, 100.0).unwrap();
        let times: Vec<f64> = (0..60).map(|i| i as f64 / 100.0).collect();
        let s = stream_from(&times, &[1.0; 60], Wrist::Right);
        assert!(matches!(
            filtfilt(&f, &s, &Channel::ACCEL),
            Err(Error::StreamTooShort { .. })
        ));
    }

    #[test]
    fn median_removes_spike_and_keeps_ramp() {
        assert_eq!(
            median_signal(&[0.0, 0.0, 10.0, 0.0, 0.0, 0.0, 0.0], 5).unwrap(),
            vec![0.0; 7]
        );
        let ramp: Vec<f64> = (0..20).map(f64::from).collect();
        assert_eq!(median_signal(&ramp, 5).unwrap(), ramp);
        assert!(matches!(median_signal(&ramp, 4), Err(Error::InvalidOrder(4))));
    }

    #[test]
    fn mirror_negates_first_fifth_sixth() {
        let s = ImuStream::new(
            vec![ImuSample::new(0.0, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])],
            100.0,
            Wrist::Left,
        )
        .unwrap();
        let (m, outcome) = mirror_hand(&s);
        assert_eq!(outcome, MirrorOutcome::Mirrored);
        assert_eq!(m.samples()[0].values, [-1.0, 2.0, 3.0, 4.0, -5.0, -6.0]);
        assert_eq!(m.wrist(), Wrist::Right);

        let (again, outcome) = mirror_hand(&m);
        assert_eq!(outcome, MirrorOutcome::AlreadyRight);
        assert_eq!(again, m);

        let (back, _) = mirror_hand(&m.with_wrist(Wrist::Left));
        assert_eq!(back.samples(), s.samples());
    }
}
