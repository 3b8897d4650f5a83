//! Weighted soft-margin linear SVM trained in the dual by cyclic
//! coordinate ascent.
//!
//! The bias is handled by appending a constant 1 to every standardized
//! row, which removes the equality constraint from the dual so each
//! coordinate can be optimized in closed form:
//!
//! ```text
//! max  sum(a) - 1/2 |sum_i a_i y_i x_i|^2     s.t. 0 <= a_i <= C * weight_i
//! ```
//!
//! After convergence the reported bias is the mean of `y_i - w.x_i` over
//! unbounded support vectors, falling back to the augmented coordinate
//! when every multiplier sits at a bound.

use std::collections::BTreeMap;

use super::design::DesignMatrix;
use super::model::{ModelKind, TrainedModel, TrainingInfo};
use super::standardize::Standardizer;
use super::LearnError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    pub max_epochs: u32,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-6,
            max_epochs: 10_000,
        }
    }
}

/// Standardized rows with the trailing bias column.
pub(crate) fn augmented_rows(m: &DesignMatrix, s: &Standardizer) -> Vec<Vec<f64>> {
    m.rows
        .iter()
        .map(|r| {
            let mut z = s.transform(r);
            z.push(1.0);
            z
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected gradient of the (minimization form of the) dual at `i`.
fn projected_gradient(g: f64, alpha: f64, upper: f64) -> f64 {
    if alpha <= 0.0 {
        g.min(0.0)
    } else if alpha >= upper {
        g.max(0.0)
    } else {
        g
    }
}

pub struct DualSolution {
    pub alpha: Vec<f64>,
    /// Augmented weights; the last entry is the bias coordinate.
    pub w: Vec<f64>,
    pub epochs: u32,
    pub converged: bool,
    pub max_violation: f64,
}

/// Cyclic coordinate ascent over instances in index order. Stops once the
/// largest projected-gradient violation is at most `stop_tol`.
pub fn solve_dual(
    x: &[Vec<f64>],
    y: &[f64],
    upper: &[f64],
    stop_tol: f64,
    max_epochs: u32,
) -> DualSolution {
    let n = x.len();
    let dim = x.first().map_or(0, Vec::len);
    let q_diag: Vec<f64> = x.iter().map(|r| dot(r, r)).collect();
    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    let mut epochs = 0;
    let mut converged = false;
    let mut violation = f64::INFINITY;

    while epochs < max_epochs {
        epochs += 1;
        let mut sweep_max = 0.0f64;
        for i in 0..n {
            let g = y[i] * dot(&w, &x[i]) - 1.0;
            let pg = projected_gradient(g, alpha[i], upper[i]);
            sweep_max = sweep_max.max(pg.abs());
            if pg != 0.0 && q_diag[i] > 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, upper[i]);
                let step = (alpha[i] - old) * y[i];
                if step != 0.0 {
                    for (wk, xk) in w.iter_mut().zip(&x[i]) {
                        *wk += step * xk;
                    }
                }
            }
        }
        if sweep_max <= stop_tol {
            violation = max_violation(x, y, upper, &alpha, &w);
            if violation <= stop_tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        violation = max_violation(x, y, upper, &alpha, &w);
    }
    DualSolution {
        alpha,
        w,
        epochs,
        converged,
        max_violation: violation,
    }
}

fn max_violation(x: &[Vec<f64>], y: &[f64], upper: &[f64], alpha: &[f64], w: &[f64]) -> f64 {
    (0..x.len())
        .map(|i| projected_gradient(y[i] * dot(w, &x[i]) - 1.0, alpha[i], upper[i]).abs())
        .fold(0.0, f64::max)
}

/// `sum(alpha) - 1/2 |w|^2` with `w` rebuilt from `alpha`.
pub fn dual_objective(x: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let dim = x.first().map_or(0, Vec::len);
    let mut w = vec![0.0; dim];
    for ((row, &yi), &a) in x.iter().zip(y).zip(alpha) {
        for (wk, xk) in w.iter_mut().zip(row) {
            *wk += a * yi * xk;
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * dot(&w, &w)
}

/// Largest KKT violation of the decision function `w.z + b` over the
/// training rows: `a=0 => y f >= 1`, `a=U => y f <= 1`, else `y f = 1`.
pub fn kkt_violation(model: &TrainedModel, m: &DesignMatrix, alpha: &[f64], upper: &[f64]) -> f64 {
    m.rows
        .iter()
        .zip(&m.labels)
        .enumerate()
        .map(|(i, (r, &y))| {
            let margin = y * model.decision_row(r);
            projected_gradient(margin - 1.0, alpha[i], upper[i]).abs()
        })
        .fold(0.0, f64::max)
}

pub struct SvmFit {
    pub model: TrainedModel,
    pub alpha: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn train_svm(m: &DesignMatrix, params: &SvmParams) -> Result<TrainedModel, LearnError> {
    Ok(fit_svm(m, params)?.model)
}

/// Like [`train_svm`] but also returns the dual multipliers and box bounds.
pub fn fit_svm(m: &DesignMatrix, params: &SvmParams) -> Result<SvmFit, LearnError> {
    m.check_two_classes()?;
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(LearnError::Invalid(format!("C must be positive, got {}", params.c)));
    }
    if !(params.tol > 0.0) {
        return Err(LearnError::Invalid(format!("tol must be positive, got {}", params.tol)));
    }
    let p = m.n_cols();
    let standardizer = Standardizer::fit(&m.rows, p);
    let x = augmented_rows(m, &standardizer);
    let upper: Vec<f64> = m.weights.iter().map(|w| params.c * w).collect();

    // Free multipliers pin their bias estimate to within the stopping
    // tolerance, so stopping at tol/2 keeps the averaged-bias model within
    // tol of every KKT condition.
    let sol = solve_dual(&x, &m.labels, &upper, params.tol * 0.5, params.max_epochs);

    let w: Vec<f64> = sol.w[..p].to_vec();
    let free: Vec<f64> = (0..x.len())
        .filter(|&i| sol.alpha[i] > 0.0 && sol.alpha[i] < upper[i])
        .map(|i| m.labels[i] - dot(&w, &x[i][..p]))
        .collect();
    let b = if free.is_empty() {
        sol.w[p]
    } else {
        free.iter().sum::<f64>() / free.len() as f64
    };

    let model = TrainedModel {
        kind: ModelKind::Svm,
        features: m.features.clone(),
        w,
        b,
        standardizer,
        imputation: m.imputation.clone(),
        hyperparams: BTreeMap::from([
            ("C".to_string(), params.c),
            ("max_iter".to_string(), f64::from(params.max_epochs)),
            ("tol".to_string(), params.tol),
        ]),
        training: TrainingInfo {
            converged: sol.converged,
            epochs: sol.epochs,
            dual_objective: Some(dual_objective(&x, &m.labels, &sol.alpha)),
            max_violation: Some(sol.max_violation),
        },
    };
    Ok(SvmFit {
        model,
        alpha: sol.alpha,
        upper,
    })
}
