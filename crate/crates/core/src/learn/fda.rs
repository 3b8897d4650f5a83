//! Fisher discriminant analysis with a trace-scaled ridge on the
//! within-class scatter.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::design::DesignMatrix;
use super::model::{ModelKind, TrainedModel, TrainingInfo};
use super::standardize::Standardizer;
use super::LearnError;

pub const DEFAULT_LAMBDA: f64 = 1e-6;

/// Weighted class means and within-class scatter of standardized rows.
pub(crate) struct ClassStats {
    pub mean_pos: DVector<f64>,
    pub mean_neg: DVector<f64>,
    pub scatter: DMatrix<f64>,
}

pub(crate) fn class_stats(z: &[Vec<f64>], labels: &[f64], weights: &[f64], p: usize) -> ClassStats {
    let mut sums = [DVector::zeros(p), DVector::zeros(p)];
    let mut mass = [0.0f64; 2];
    for ((row, &y), &w) in z.iter().zip(labels).zip(weights) {
        let c = usize::from(y < 0.0);
        mass[c] += w;
        for (s, v) in sums[c].iter_mut().zip(row) {
            *s += w * v;
        }
    }
    let [sum_pos, sum_neg] = sums;
    let mean_pos = sum_pos / mass[0];
    let mean_neg = sum_neg / mass[1];
    let mut scatter = DMatrix::zeros(p, p);
    let mut d = DVector::zeros(p);
    for ((row, &y), &w) in z.iter().zip(labels).zip(weights) {
        let mu = if y > 0.0 { &mean_pos } else { &mean_neg };
        for j in 0..p {
            d[j] = row[j] - mu[j];
        }
        scatter.ger(w, &d, &d, 1.0);
    }
    ClassStats {
        mean_pos,
        mean_neg,
        scatter,
    }
}

/// Solves `(S_W + lambda * tr(S_W)/p * I) w = mu+ - mu-` on standardized
/// data, with `p` counting only columns that vary so constant columns leave
/// the solution untouched. Then scales `w` to unit norm and puts the
/// threshold midway between the projected class means.
pub fn train_fda(m: &DesignMatrix, lambda: f64) -> Result<TrainedModel, LearnError> {
    m.check_two_classes()?;
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(LearnError::Invalid(format!("lambda must be non-negative, got {lambda}")));
    }
    let p = m.n_cols();
    let standardizer = Standardizer::fit(&m.rows, p);
    let z: Vec<Vec<f64>> = m.rows.iter().map(|r| standardizer.transform(r)).collect();
    let stats = class_stats(&z, &m.labels, &m.weights, p);

    let trace = stats.scatter.trace();
    let active = standardizer.zero_var.iter().filter(|z| !**z).count().max(1);
    let scale = if trace > 0.0 { trace / active as f64 } else { 1.0 };
    let mut a = stats.scatter.clone();
    for j in 0..p {
        a[(j, j)] += lambda * scale;
    }
    let diff = &stats.mean_pos - &stats.mean_neg;

    let w = match a.clone().cholesky() {
        Some(ch) => ch.solve(&diff),
        None => a.lu().solve(&diff).ok_or(LearnError::SingularScatter)?,
    };
    if w.iter().any(|v| !v.is_finite()) {
        return Err(LearnError::SingularScatter);
    }
    let norm = w.norm();
    let w = if norm > 0.0 { w / norm } else { w };
    let midpoint = (&stats.mean_pos + &stats.mean_neg) * 0.5;
    let b = -w.dot(&midpoint);

    Ok(TrainedModel {
        kind: ModelKind::Fda,
        features: m.features.clone(),
        w: w.iter().copied().collect(),
        b,
        standardizer,
        imputation: m.imputation.clone(),
        hyperparams: BTreeMap::from([("lambda".to_string(), lambda)]),
        training: TrainingInfo {
            converged: true,
            epochs: 0,
            dual_objective: None,
            max_violation: None,
        },
    })
}
