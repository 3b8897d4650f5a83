//! Classifier outputs checked against independent reference solutions.

mod common;

use common::oracle::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use rand_xoshiro::Xoshiro256StarStar;
use vulnscore::learn::{fit_svm, svm::kkt_violation, train_fda, DesignMatrix, SvmParams};

fn two_gaussians(seed: u64, n: usize, pos_mean: [f64; 2]) -> DesignMatrix {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    // Classes in blocks: the first half at the origin, the second half
    // at `pos_mean`.
    for i in 0..n {
        let pos = i >= n / 2;
        let mu = if pos { pos_mean } else { [0.0, 0.0] };
        rows.push(vec![mu[0] + normal.sample(&mut rng), mu[1] + normal.sample(&mut rng)]);
        labels.push(if pos { 1.0 } else { -1.0 });
    }
    DesignMatrix {
        features: vec!["l2.x0".into(), "l2.x1".into()],
        rows,
        labels,
        weights: vec![1.0; n],
        imputation: vec![0.0; 2],
    }
}

fn rat(v: f64) -> BigRational {
    BigRational::from_f64(v).unwrap()
}

/// `S_W^{-1} (mu+ - mu-)` on raw 2-D data, in exact rational arithmetic.
fn exact_fisher_2d(m: &DesignMatrix) -> [f64; 2] {
    let mut sum = [[BigRational::zero(), BigRational::zero()], [BigRational::zero(), BigRational::zero()]];
    let mut count = [0i64; 2];
    for (r, y) in m.rows.iter().zip(&m.labels) {
        let c = usize::from(*y < 0.0);
        count[c] += 1;
        for j in 0..2 {
            sum[c][j] += rat(r[j]);
        }
    }
    let mean: Vec<Vec<BigRational>> = (0..2)
        .map(|c| (0..2).map(|j| &sum[c][j] / BigRational::from_integer(BigInt::from(count[c]))).collect())
        .collect();
    let mut s = [[BigRational::zero(), BigRational::zero()], [BigRational::zero(), BigRational::zero()]];
    for (r, y) in m.rows.iter().zip(&m.labels) {
        let mu = &mean[usize::from(*y < 0.0)];
        let d = [rat(r[0]) - &mu[0], rat(r[1]) - &mu[1]];
        for a in 0..2 {
            for b in 0..2 {
                s[a][b] += &d[a] * &d[b];
            }
        }
    }
    let diff = [&mean[0][0] - &mean[1][0], &mean[0][1] - &mean[1][1]];
    let det = &s[0][0] * &s[1][1] - &s[0][1] * &s[1][0];
    assert!(det.abs() > BigRational::zero());
    let w0 = (&s[1][1] * &diff[0] - &s[0][1] * &diff[1]) / &det;
    let w1 = (&s[0][0] * &diff[1] - &s[1][0] * &diff[0]) / &det;
    [w0.to_f64().unwrap(), w1.to_f64().unwrap()]
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (dot / (na * nb)).clamp(-1.0, 1.0).acos()
}

#[test]
fn fda_gaussian_direction_matches_exact_solution() {
    let m = two_gaussians(7, 200, [2.0, 0.0]);
    let model = train_fda(&m, 1e-6).unwrap();
    let (raw_w, _) = model.raw_coefficients();
    let exact = exact_fisher_2d(&m);
    assert!(angle(&exact, &[1.0, 0.0]) < 5f64.to_radians());
    assert!(angle(&raw_w, &[1.0, 0.0]) < 5f64.to_radians());
    assert!(angle(&raw_w, &exact) < 1e-5, "ridge moves the direction only slightly");
}

#[test]
fn fda_matches_float_oracle_on_weighted_data() {
    for seed in 0..20 {
        let m = random_problem(seed, 30, 4);
        let model = train_fda(&m, 1e-6).unwrap();
        assert!(direction_error(&model.w, &fda_direction(&m, 1e-6)) < 1e-8);
    }
}

#[test]
fn svm_objective_matches_projected_gradient_oracle() {
    let m = two_gaussians(11, 50, [1.5, 1.0]);
    let fit = fit_svm(&m, &SvmParams::default()).unwrap();
    assert!(fit.model.training.converged);
    let (oracle, viol) = svm_dual_pg(&m, 1.0, 1e-9, 200_000);
    assert!(viol <= 1e-6, "oracle stalled at {viol}");
    let ours = fit.model.training.dual_objective.unwrap();
    assert!((ours - oracle).abs() <= 1e-3, "{ours} vs {oracle}");
    assert!(kkt_violation(&fit.model, &m, &fit.alpha, &fit.upper) <= 1e-6);
}

#[test]
fn positive_rescaling_keeps_predictions() {
    let m = random_problem(3, 40, 3);
    let model = fit_svm(&m, &SvmParams::default()).unwrap().model;
    for k in [1e-3, 0.5, 7.0, 1e4] {
        let mut scaled = model.clone();
        scaled.w.iter_mut().for_each(|w| *w *= k);
        scaled.b *= k;
        for r in &m.rows {
            assert_eq!(model.decision_row(r) >= 0.0, scaled.decision_row(r) >= 0.0);
        }
    }
}
