use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::ExperimentReport;
use super::rfe::{run_rfe_rows, RfeTrace};
use super::rng::derive_seed;
use super::split::{make_split_plan, SplitPlan};
use super::{correct, train_rows, EvalConfig, EvalError};
use crate::corpus::{Dataset, Layer};
use crate::learn::{layer3_instance_weights, FeatureMask, ModelKind, TrainedModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subset {
    #[serde(rename = "l1+l2")]
    L1L2,
    #[serde(rename = "all")]
    All,
    #[serde(rename = "rfe")]
    Rfe,
}

impl Subset {
    pub const ALL: [Subset; 3] = [Subset::L1L2, Subset::All, Subset::Rfe];

    pub fn as_str(self) -> &'static str {
        match self {
            Subset::L1L2 => "l1+l2",
            Subset::All => "all",
            Subset::Rfe => "rfe",
        }
    }

    /// The L1+L2 cells are the unweighted baseline; only cells that see
    /// layer 3 use layer-3 instance weights.
    pub fn beta(self, cfg: &EvalConfig) -> f64 {
        match self {
            Subset::L1L2 => 0.0,
            Subset::All | Subset::Rfe => cfg.beta,
        }
    }
}

impl std::str::FromStr for Subset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "l1+l2" | "l1l2" => Ok(Subset::L1L2),
            "all" => Ok(Subset::All),
            "rfe" => Ok(Subset::Rfe),
            _ => Err(format!("unknown subset {s:?}; expected l1+l2, all or rfe")),
        }
    }
}

/// A model fitted on one training split, with everything it learned.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFit {
    pub model: TrainedModel,
    pub mask: FeatureMask,
    pub rfe: Option<RfeTrace>,
    pub warnings: Vec<String>,
}

/// Fits one cell's model on `rows` only. `seed` drives the inner RFE
/// folds; nothing outside `rows` is read except per-instance weights,
/// which depend on each instance alone.
pub fn fit_cell(
    d: &Dataset,
    kind: ModelKind,
    subset: Subset,
    rows: &[usize],
    seed: u64,
    cfg: &EvalConfig,
) -> Result<CellFit, EvalError> {
    let weights = layer3_instance_weights(d, subset.beta(cfg))?;
    let params = cfg.train_params(kind);
    let mut warnings = Vec::new();
    let (mask, rfe) = match subset {
        Subset::L1L2 => (FeatureMask::layers(&d.dictionary, &[Layer::L1, Layer::L2]), None),
        Subset::All => (FeatureMask::all(&d.dictionary), None),
        Subset::Rfe => {
            let trace = run_rfe_rows(d, kind, rows, &weights, seed, cfg)?;
            warnings.extend(trace.warnings.iter().cloned());
            (trace.selected.clone(), Some(trace))
        }
    };
    let (model, warn) = train_rows(d, kind, &mask, rows, &weights, &params)?;
    warnings.extend(warn);
    Ok(CellFit {
        model,
        mask,
        rfe,
        warnings,
    })
}

/// One grid cell. `mean_acc`/`fold_std` come from cross-validation over
/// the whole dataset, `test_acc` from the holdout split, and `ci` from
/// bootstrap-trained models scored on the holdout test set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub model: ModelKind,
    pub subset: Subset,
    pub mean_acc: f64,
    pub fold_std: f64,
    pub fold_acc: Vec<f64>,
    pub test_acc: f64,
    pub ci: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_features: Option<Vec<String>>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// Linear-interpolated percentile of sorted values, `q` in [0, 1].
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn evaluate_cell(
    d: &Dataset,
    kind: ModelKind,
    subset: Subset,
    plan: &SplitPlan,
    cfg: &EvalConfig,
) -> Result<CellResult, EvalError> {
    cfg.validate()?;
    let mut warnings = Vec::new();

    let fold_acc = (0..plan.folds)
        .map(|f| {
            let test = plan.fold_test(f);
            let fit = fit_cell(d, kind, subset, &plan.fold_train(f), derive_seed(plan.seed, 100 + f as u64), cfg)?;
            Ok((correct(&fit.model, d, &test) as f64 / test.len().max(1) as f64, fit.warnings))
        })
        .collect::<Result<Vec<_>, EvalError>>()?
        .into_iter()
        .map(|(acc, w)| {
            warnings.extend(w);
            acc
        })
        .collect::<Vec<f64>>();
    let k = fold_acc.len() as f64;
    let mean_acc = fold_acc.iter().sum::<f64>() / k;
    let fold_std = (fold_acc.iter().map(|a| (a - mean_acc).powi(2)).sum::<f64>() / k).sqrt();

    let holdout = fit_cell(d, kind, subset, &plan.train, derive_seed(plan.seed, 1), cfg)?;
    warnings.extend(holdout.warnings.iter().cloned());
    let test_acc = correct(&holdout.model, d, &plan.test) as f64 / plan.test.len().max(1) as f64;

    // Resampled models reuse the holdout feature mask.
    let ci = if plan.bootstraps.is_empty() {
        None
    } else {
        let weights = layer3_instance_weights(d, subset.beta(cfg))?;
        let params = cfg.train_params(kind);
        let mut accs = plan
            .bootstraps
            .iter()
            .map(|rows| {
                let (m, w) = train_rows(d, kind, &holdout.mask, rows, &weights, &params)?;
                warnings.extend(w);
                Ok(correct(&m, d, &plan.test) as f64 / plan.test.len().max(1) as f64)
            })
            .collect::<Result<Vec<f64>, EvalError>>()?;
        accs.sort_by(f64::total_cmp);
        Some([percentile(&accs, 0.025), percentile(&accs, 0.975)])
    };

    warnings.sort();
    warnings.dedup();
    Ok(CellResult {
        model: kind,
        subset,
        mean_acc,
        fold_std,
        fold_acc,
        test_acc,
        ci,
        selected_features: (subset == Subset::Rfe).then(|| holdout.mask.names().to_vec()),
        warnings,
    })
}

/// All six cells (two models by three subsets) on one shared plan.
pub fn run_table1_grid(d: &Dataset, seed: u64, cfg: &EvalConfig) -> Result<ExperimentReport, EvalError> {
    cfg.validate()?;
    let plan = make_split_plan(d, seed, cfg.folds, cfg.bootstraps)?;
    let specs: Vec<(ModelKind, Subset)> = [ModelKind::Fda, ModelKind::Svm]
        .into_iter()
        .flat_map(|k| Subset::ALL.map(|s| (k, s)))
        .collect();
    let cells = specs
        .par_iter()
        .map(|&(k, s)| evaluate_cell(d, k, s, &plan, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ExperimentReport::new(d, &plan, cfg, cells))
}
