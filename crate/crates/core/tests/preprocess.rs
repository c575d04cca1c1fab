mod common;

use biteweight::config::PreprocessConfig;
use biteweight::evaluation::{generate_synthetic_raw, SynthProfile};
use biteweight::preprocess::{
    design_highpass, filtfilt, filtfilt_signal, median_filter, median_signal, mirror_hand, preprocess_stream,
    resample_linear, MirrorOutcome,
};
use biteweight::{Channel, Error, ImuSample, ImuStream, Wrist};
use common::{interp_oracle, median_oracle, xcorr_peak_lag};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn stream_of(values: &[f64], fs: f64, wrist: Wrist) -> ImuStream {
    let samples = values
        .iter()
        .enumerate()
        .map(|(i, &v)| ImuSample::new(i as f64 / fs, [v, v, v, v, v, v]))
        .collect();
    ImuStream::new(samples, fs, wrist).unwrap()
}

#[test]
fn resampling_matches_two_pointer_oracle_on_jittered_generator_data() {
    let raw = generate_synthetic_raw(2, 7, &SynthProfile::default()).unwrap();
    let imu = &raw[0].imu;
    let out = resample_linear(imu, 100.0).unwrap();
    let ts = imu.times();
    let grid = out.times();
    assert!((out.fs() - 100.0).abs() < 1e-12);
    for (k, t) in grid.iter().enumerate() {
        assert!((t - (ts[0] + k as f64 / 100.0).min(ts[ts.len() - 1])).abs() < 1e-12);
    }
    for ch in Channel::ALL {
        let expect = interp_oracle(&ts, &imu.channel(ch), &grid);
        for (a, b) in out.channel(ch).iter().zip(&expect) {
            assert!((a - b).abs() <= 1e-12, "{ch:?}: {a} vs {b}");
        }
    }
}

#[test]
fn resampling_small_linear_case() {
    let samples = vec![
        ImuSample::new(0.0, [0.0; 6]),
        ImuSample::new(0.02, [1.0; 6]),
        ImuSample::new(0.04, [2.0; 6]),
    ];
    let s = ImuStream::new(samples, 50.0, Wrist::Right).unwrap();
    let out = resample_linear(&s, 100.0).unwrap();
    let expect = [0.0, 0.5, 1.0, 1.5, 2.0];
    assert_eq!(out.len(), 5);
    for (a, b) in out.channel(Channel::Ax).iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn highpass_design_response() {
    let h = design_highpass(1.0, 501, 100.0).unwrap();
    assert!(h.gain_at(0.0) <= 1e-6);
    // independent frequency response of the taps
    let taps = h.taps();
    let mid = (taps.len() / 2) as f64;
    let resp = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, a) in taps.iter().enumerate() {
            let ph = 2.0 * PI * f / 100.0 * (k as f64 - mid);
            re += a * ph.cos();
            im -= a * ph.sin();
        }
        (re * re + im * im).sqrt()
    };
    let g5 = resp(5.0);
    assert!((0.98..=1.02).contains(&g5), "{g5}");
    assert!(resp(0.0) <= 1e-6);
    assert!(matches!(design_highpass(1.0, 500, 100.0), Err(Error::InvalidParams(_))));
    assert!(matches!(design_highpass(60.0, 501, 100.0), Err(Error::InvalidParams(_))));
}

#[test]
fn filtfilt_removes_gravity() {
    let n = 3000;
    let samples = (0..n)
        .map(|i| ImuSample::new(i as f64 / 100.0, [0.0, 0.0, 9.81, 0.0, 0.0, 0.0]))
        .collect();
    let s = ImuStream::new(samples, 100.0, Wrist::Right).unwrap();
    let h = design_highpass(1.0, 501, 100.0).unwrap();
    let out = filtfilt(&h, &s, &Channel::ACCEL).unwrap();
    let max = out.channel(Channel::Az).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max <= 1e-6, "{max}");
}

#[test]
fn filtfilt_is_zero_phase_at_5hz() {
    let n = 4000;
    let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 5.0 * i as f64 / 100.0).sin()).collect();
    let h = design_highpass(1.0, 501, 100.0).unwrap();
    let y = filtfilt_signal(&h, &x).unwrap();
    let core = 1000..3000;
    let amp = y[core.clone()].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!((0.96..=1.04).contains(&amp), "{amp}");
    let lag = xcorr_peak_lag(&x[core.clone()], &y[core], 10);
    assert!(lag.abs() <= 1, "{lag}");
}

#[test]
fn filtfilt_twice_keeps_inband_gain() {
    let n = 4000;
    let h = design_highpass(1.0, 501, 100.0).unwrap();
    for f in [3.0, 5.0, 12.0] {
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * f * i as f64 / 100.0).sin()).collect();
        let once = filtfilt_signal(&h, &x).unwrap();
        let twice = filtfilt_signal(&h, &once).unwrap();
        let peak = |v: &[f64]| v[1000..3000].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!((peak(&twice) / peak(&once) - 1.0).abs() <= 0.02, "{f} Hz");
    }
}

#[test]
fn filtfilt_rejects_short_streams() {
    let h = design_highpass(1.0, 501, 100.0).unwrap();
    let s = stream_of(&[0.0; 60], 100.0, Wrist::Right);
    assert!(matches!(filtfilt(&h, &s, &Channel::ACCEL), Err(Error::StreamTooShort { .. })));
}

#[test]
fn median_spike_ramp_and_oracle() {
    assert_eq!(
        median_signal(&[0.0, 0.0, 10.0, 0.0, 0.0, 0.0, 0.0], 5).unwrap(),
        vec![0.0; 7]
    );
    let ramp: Vec<f64> = (0..20).map(f64::from).collect();
    assert_eq!(median_signal(&ramp, 5).unwrap(), ramp);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let x: Vec<f64> = (0..50).map(|_| rng.random_range(-5.0..5.0)).collect();
        assert_eq!(median_signal(&x, 5).unwrap(), median_oracle(&x, 5));
    }
    assert!(matches!(median_signal(&ramp, 4), Err(Error::InvalidOrder(4))));
}

#[test]
fn mirror_involution_and_right_noop() {
    let s = ImuStream::new(vec![ImuSample::new(0.0, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])], 100.0, Wrist::Left).unwrap();
    let (m, outcome) = mirror_hand(&s);
    assert_eq!(outcome, MirrorOutcome::Mirrored);
    assert_eq!(m.samples()[0].values, [-1.0, 2.0, 3.0, 4.0, -5.0, -6.0]);
    assert_eq!(m.wrist(), Wrist::Right);
    let (back, _) = mirror_hand(&m.clone().with_wrist(Wrist::Left));
    assert_eq!(back.samples(), s.samples());
    let (same, outcome) = mirror_hand(&m);
    assert_eq!(outcome, MirrorOutcome::AlreadyRight);
    assert_eq!(same, m);
}

#[test]
fn left_wrist_generator_fixture_is_conditioned() {
    let profile = SynthProfile {
        left_wrist_fraction: 1.0,
        ..SynthProfile::default()
    };
    let raw = generate_synthetic_raw(2, 7, &profile).unwrap();
    let imu = &raw[0].imu;
    assert_eq!(imu.wrist(), Wrist::Left);
    let out = preprocess_stream(imu, &PreprocessConfig::default()).unwrap();
    assert_eq!(out.wrist(), Wrist::Right);
    assert!((out.fs() - 100.0).abs() < 1e-12);
    // the lead-in is still; skip filter edges
    let still: Vec<&ImuSample> = out.samples().iter().filter(|s| (6.0..15.0).contains(&s.t)).collect();
    assert!(still.len() > 800);
    for ch in Channel::ACCEL {
        let mean_abs = still.iter().map(|s| s.get(ch).abs()).sum::<f64>() / still.len() as f64;
        assert!(mean_abs < 0.05, "{ch:?}: {mean_abs}");
    }
}

#[test]
fn uniform_right_wrist_input_only_filtered() {
    let n = 2000;
    let samples: Vec<ImuSample> = (0..n)
        .map(|i| {
            let t = i as f64 / 100.0;
            ImuSample::new(t, [t.sin(), 0.5, 9.81, (3.0 * t).cos(), 0.1 * t, -1.0])
        })
        .collect();
    let s = ImuStream::new(samples, 100.0, Wrist::Right).unwrap();
    let cfg = PreprocessConfig::default();
    let resampled = resample_linear(&s, 100.0).unwrap();
    for (a, b) in resampled.samples().iter().zip(s.samples()) {
        for c in 0..6 {
            assert!((a.values[c] - b.values[c]).abs() < 1e-12);
        }
    }
    let out = preprocess_stream(&s, &cfg).unwrap();
    let h = design_highpass(1.0, 501, 100.0).unwrap();
    let expect = median_filter(&filtfilt(&h, &s, &Channel::ACCEL).unwrap(), 5).unwrap();
    for (a, b) in out.samples().iter().zip(expect.samples()) {
        for c in 0..6 {
            assert!((a.values[c] - b.values[c]).abs() < 1e-12);
        }
    }
}

#[test]
fn empty_stream_is_too_few_samples() {
    let s = ImuStream::new(vec![ImuSample::new(0.0, [0.0; 6])], 100.0, Wrist::Right).unwrap();
    assert!(matches!(
        preprocess_stream(&s, &PreprocessConfig::default()),
        Err(Error::TooFewSamples { .. })
    ));
}

proptest! {
    #[test]
    fn median_output_within_input_range(x in prop::collection::vec(-100.0f64..100.0, 1..80)) {
        let y = median_signal(&x, 5).unwrap();
        let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(y.iter().all(|v| (lo..=hi).contains(v)));
    }

    #[test]
    fn mirror_preserves_magnitudes(vals in prop::collection::vec(prop::array::uniform6(-50.0f64..50.0), 1..30)) {
        let samples = vals.iter().enumerate().map(|(i, v)| ImuSample::new(i as f64 * 0.01, *v)).collect();
        let s = ImuStream::new(samples, 100.0, Wrist::Left).unwrap();
        let (m, _) = mirror_hand(&s);
        for (a, b) in m.samples().iter().zip(s.samples()) {
            for c in 0..6 {
                prop_assert_eq!(a.values[c].abs(), b.values[c].abs());
            }
        }
    }

    #[test]
    fn resampling_exact_on_piecewise_linear(
        knots in prop::collection::vec((0.005f64..0.05, -10.0f64..10.0), 2..40)
    ) {
        let mut t = 0.0;
        let mut samples = Vec::new();
        for (dt, v) in &knots {
            samples.push(ImuSample::new(t, [*v; 6]));
            t += dt;
        }
        let s = ImuStream::with_estimated_rate(samples, Wrist::Right).unwrap();
        let out = resample_linear(&s, 100.0).unwrap();
        let expect = interp_oracle(&s.times(), &s.channel(Channel::Ay), &out.times());
        for (a, b) in out.channel(Channel::Ay).iter().zip(&expect) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }
}
