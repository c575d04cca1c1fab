mod common;

use biteweight::config::{ForestParams, SvrParams};
use biteweight::regression::{
    fit_linear_svr, fit_tree, primal_objective, BaselinePredictor, ForestModel, ScalerParams, SvrModel,
};
use biteweight::Error;
use common::{svr_grid_min, svr_objective};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<f64>, SvrParams) {
    let n = rng.random_range(2..=5);
    let d = rng.random_range(1..=2);
    let x = (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let y = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    let params = SvrParams {
        c: rng.random_range(0.1..5.0),
        eps: rng.random_range(0.0..0.5),
        ..SvrParams::default()
    };
    (x, y, params)
}

#[test]
fn svr_matches_grid_oracle_on_random_tiny_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..40 {
        let (x, y, p) = tiny_instance(&mut rng);
        let fit = fit_linear_svr(&x, &y, &p).unwrap();
        let obj = svr_objective(&fit.w, fit.b, &x, &y, p.c, p.eps);
        let grid = svr_grid_min(&x, &y, p.c, p.eps);
        assert!(obj <= grid + 1e-4, "case {case}: solver {obj} vs grid {grid}");
        assert!(grid <= obj + 1e-3, "case {case}: oracle too coarse ({grid} vs {obj})");
        assert!((fit.objective - obj).abs() < 1e-9);
        assert!(fit.duality_gap <= 1e-6);
    }
}

#[test]
fn two_point_instance_and_prediction() {
    let x = vec![vec![0.0], vec![1.0]];
    let y = [0.0, 1.0];
    let fit = fit_linear_svr(&x, &y, &SvrParams::default()).unwrap();
    assert!((fit.w[0] - 0.968).abs() < 1e-3);
    assert!((fit.b - 0.016).abs() < 1e-3);
    assert!((fit.w[0] + fit.b - 0.984).abs() < 1e-3);
    let grid = svr_grid_min(&x, &y, 1.01, 0.016);
    assert!((fit.objective - grid).abs() < 1e-4);
}

#[test]
fn conflicting_duplicates_converge_with_slack() {
    let x = vec![vec![1.0], vec![1.0], vec![0.0]];
    let y = [0.0, 2.0, 0.5];
    let p = SvrParams::default();
    let fit = fit_linear_svr(&x, &y, &p).unwrap();
    let loss: f64 = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| ((yi - fit.w[0] * xi[0] - fit.b).abs() - p.eps).max(0.0))
        .sum();
    assert!(loss > 0.0);
    assert!((fit.objective - svr_grid_min(&x, &y, p.c, p.eps)).abs() < 1e-4);
}

#[test]
fn tube_interior_points_have_zero_dual_weight() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..10 {
        let n = 60;
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| 1.5 * r[0] - 0.5 * r[2] + rng.random_range(-0.3..0.3))
            .collect();
        let p = SvrParams {
            eps: 0.2,
            ..SvrParams::default()
        };
        let fit = fit_linear_svr(&x, &y, &p).unwrap();
        for (i, (xi, yi)) in x.iter().zip(&y).enumerate() {
            let r = yi - fit.w.iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() - fit.b;
            if r.abs() < p.eps - 1e-9 {
                assert_eq!(fit.beta[i], 0.0, "point {i} inside the tube carries weight");
            }
            assert!(fit.beta[i].abs() <= p.c + 1e-12);
        }
        let obj = primal_objective(&fit.w, fit.b, &x, &y, p.c, p.eps);
        assert!((obj - fit.objective).abs() < 1e-9);
    }
}

#[test]
fn flat_targets_give_flat_model() {
    let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64]).collect();
    let y = vec![4.2; 10];
    let m = SvrModel::fit(&x, &y, &SvrParams::default()).unwrap();
    assert!(m.w.iter().all(|w| w.abs() < 1e-12));
    for xi in &x {
        assert!((m.predict(xi) - 4.2).abs() <= 0.016);
    }
}

#[test]
fn standardization_absorbs_column_scaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<Vec<f64>> = (0..40).map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = x.iter().map(|r| 10.0 + 3.0 * r[0] - 2.0 * r[3] + rng.random_range(-0.5..0.5)).collect();
    let scaled: Vec<Vec<f64>> = x
        .iter()
        .map(|r| r.iter().enumerate().map(|(j, v)| if j == 1 { v * 1000.0 } else { *v }).collect())
        .collect();
    let a = SvrModel::fit(&x, &y, &SvrParams::default()).unwrap();
    let b = SvrModel::fit(&scaled, &y, &SvrParams::default()).unwrap();
    for (ra, rb) in x.iter().zip(&scaled) {
        assert!((a.predict(ra) - b.predict(rb)).abs() < 1e-6);
    }
}

#[test]
fn scaler_centers_columns() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<Vec<f64>> = (0..25).map(|_| (0..4).map(|_| rng.random_range(-50.0..50.0)).collect()).collect();
    let s = ScalerParams::fit(&x).unwrap();
    let z = s.transform(&x);
    for j in 0..4 {
        let m = z.iter().map(|r| r[j]).sum::<f64>() / z.len() as f64;
        assert!(m.abs() < 1e-12);
    }
}

#[test]
fn svr_rejects_bad_input() {
    assert!(matches!(
        fit_linear_svr(&[vec![1.0]], &[1.0], &SvrParams::default()),
        Err(Error::TooFewSamples { .. })
    ));
    let bad = SvrParams {
        c: 0.0,
        ..SvrParams::default()
    };
    assert!(matches!(
        fit_linear_svr(&[vec![0.0], vec![1.0]], &[0.0, 1.0], &bad),
        Err(Error::InvalidParams(_))
    ));
}

#[test]
fn baseline_mae_is_mean_deviation() {
    let b = BaselinePredictor::fit(&[10.0, 20.0, 30.0]).unwrap();
    assert_eq!(b.predict(), 20.0);
    assert_eq!(BaselinePredictor::fit(&[10.89]).unwrap().predict(), 10.89);
    let test = [12.0, 25.0, 19.5];
    let mae: f64 = test.iter().map(|t| (t - b.predict()).abs()).sum::<f64>() / 3.0;
    assert!((mae - (8.0 + 5.0 + 0.5) / 3.0).abs() < 1e-12);
}

#[test]
fn forest_predictions_bounded_and_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let x: Vec<Vec<f64>> = (0..80).map(|_| (0..56).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = x.iter().map(|r| 5.0 + 4.0 * r[3] + rng.random_range(0.0..1.0)).collect();
    let p = ForestParams {
        seed: 7,
        ..ForestParams::default()
    };
    let a = ForestModel::fit(&x, &y, &p).unwrap();
    let b = ForestModel::fit(&x, &y, &p).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trees.len(), 40);
    let (lo, hi) = y.iter().fold((f64::MAX, f64::MIN), |(l, h), v| (l.min(*v), h.max(*v)));
    for r in &x {
        let pa = a.predict(r);
        assert_eq!(pa.to_bits(), b.predict(r).to_bits());
        assert!((lo..=hi).contains(&pa));
    }
    let c = ForestModel::fit(&x, &y, &ForestParams { seed: 8, ..p }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn forest_constant_targets_and_exact_split() {
    let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, -(i as f64)]).collect();
    let f = ForestModel::fit(&x, &[7.0; 20], &ForestParams::default()).unwrap();
    assert!(x.iter().all(|r| f.predict(r) == 7.0));
    assert_eq!(f.predict(&[100.0, 3.0]), 7.0);

    let x = vec![vec![0.0], vec![0.0], vec![1.0], vec![1.0]];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let tree = fit_tree(&x, &[1.0, 1.0, 5.0, 5.0], (0..4).collect(), 1, &mut rng);
    assert_eq!(tree.predict(&[0.0]), 1.0);
    assert_eq!(tree.predict(&[1.0]), 5.0);
}
