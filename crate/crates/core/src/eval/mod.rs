//! Feature selection and the evaluation protocol: holdout split,
//! stratified cross-validation, bootstrap resampling and the six-cell
//! experiment grid.

pub mod grid;
pub mod report;
pub mod rfe;
pub mod rng;
pub mod split;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dataset, Label};
use crate::learn::{
    build_design_matrix_rows, train, FeatureMask, LearnError, ModelKind, SvmParams, TrainParams,
    TrainedModel,
};

pub use grid::{evaluate_cell, fit_cell, run_table1_grid, CellFit, CellResult, Subset};
pub use report::{render_table, ExperimentReport};
pub use rfe::{run_rfe, run_rfe_rows, CurvePoint, Elimination, RfeTrace};
pub use rng::{derive_seed, SplitRng};
pub use split::{make_split_plan, SplitPlan};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("dataset must contain both classes")]
    SingleClass,
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("{0}")]
    Invalid(String),
}

/// Every knob of the evaluation protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub folds: usize,
    pub bootstraps: usize,
    /// Layer-3 instance weight strength for the `all` and `rfe` cells.
    pub beta: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: u32,
    pub rfe_step: usize,
    pub rfe_folds: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        let svm = SvmParams::default();
        EvalConfig {
            folds: 10,
            bootstraps: 100,
            beta: 1.0,
            c: svm.c,
            lambda: crate::learn::DEFAULT_LAMBDA,
            tol: svm.tol,
            max_iter: svm.max_epochs,
            rfe_step: 1,
            rfe_folds: 5,
        }
    }
}

impl EvalConfig {
    pub fn train_params(&self, kind: ModelKind) -> TrainParams {
        match kind {
            ModelKind::Fda => TrainParams::Fda {
                lambda: self.lambda,
            },
            ModelKind::Svm => TrainParams::Svm(SvmParams {
                c: self.c,
                tol: self.tol,
                max_epochs: self.max_iter,
            }),
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::Invalid(m.to_string()));
        if self.folds < 2 {
            return bad("folds must be at least 2");
        }
        if self.rfe_folds < 2 {
            return bad("rfe_folds must be at least 2");
        }
        if self.rfe_step == 0 {
            return bad("rfe_step must be at least 1");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta must be a non-negative number");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("C must be positive");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be non-negative");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        Ok(())
    }
}

/// Trains on `rows` with the given per-instance weights (indexed by
/// dataset position). A single-class training set yields a constant
/// classifier and a warning instead of an error.
pub(crate) fn train_rows(
    d: &Dataset,
    kind: ModelKind,
    mask: &FeatureMask,
    rows: &[usize],
    weights: &[f64],
    params: &TrainParams,
) -> Result<(TrainedModel, Option<String>), EvalError> {
    match build_design_matrix_rows(d, mask, rows) {
        Ok(m) => {
            let w = rows.iter().map(|&r| weights[r]).collect();
            Ok((train(&m.with_weights(w)?, params)?, None))
        }
        Err(LearnError::SingleClass) => {
            let label = rows
                .first()
                .map_or(Label::Vulnerable, |&r| d.instances[r].label);
            let model = TrainedModel::constant(kind, mask.names().to_vec(), label);
            Ok((
                model,
                Some(format!(
                    "a training split holds only {} instances; predicting that class",
                    label.as_str()
                )),
            ))
        }
        Err(e) => Err(e.into()),
    }
}

/// Number of `rows` the model labels correctly.
pub(crate) fn correct(model: &TrainedModel, d: &Dataset, rows: &[usize]) -> usize {
    rows.iter()
        .filter(|&&r| model.predict(&d.instances[r].features) == d.instances[r].label)
        .count()
}
