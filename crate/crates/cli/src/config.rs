//! Run configuration: a JSON file supplies defaults, command-line flags
//! override them, and anything left unset takes the library default.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use vulnscore::eval::{EvalConfig, Subset};
use vulnscore::learn::ModelKind;

use crate::error::CliError;

/// Contents of `--config FILE`. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub model: Option<String>,
    pub subset: Option<String>,
    pub beta: Option<f64>,
    #[serde(rename = "C")]
    pub c: Option<f64>,
    pub lambda: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<u32>,
    pub rfe_step: Option<usize>,
    pub rfe_folds: Option<usize>,
    pub folds: Option<usize>,
    pub bootstraps: Option<usize>,
    pub binarize_l1: Option<bool>,
    pub dataset: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Invalid(format!("{}: invalid run configuration: {e}", path.display())))
    }

    pub fn model(&self, flag: Option<ModelKind>) -> Result<ModelKind, CliError> {
        match (flag, &self.model) {
            (Some(k), _) => Ok(k),
            (None, Some(s)) => s.parse().map_err(CliError::Invalid),
            (None, None) => Err(CliError::Invalid("a classifier is required (--model fda|svm)".into())),
        }
    }

    pub fn subset(&self, flag: Option<Subset>) -> Result<Subset, CliError> {
        match (flag, &self.subset) {
            (Some(s), _) => Ok(s),
            (None, Some(s)) => s.parse().map_err(CliError::Invalid),
            (None, None) => Ok(Subset::All),
        }
    }

    pub fn path(&self, flag: Option<PathBuf>, from_config: &Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
        flag.or_else(|| from_config.clone())
            .ok_or_else(|| CliError::Invalid(format!("missing {what}")))
    }
}

/// Protocol and hyperparameter flags shared by train, rfe and evaluate.
#[derive(Debug, Clone, Default, Args)]
pub struct Tuning {
    /// Layer-3 instance weight strength
    #[arg(long)]
    pub beta: Option<f64>,
    /// SVM box constraint
    #[arg(long = "C", visible_alias = "c")]
    pub c: Option<f64>,
    /// FDA ridge, relative to the mean scatter eigenvalue
    #[arg(long)]
    pub lambda: Option<f64>,
    /// SVM optimality tolerance
    #[arg(long)]
    pub tol: Option<f64>,
    /// SVM epoch limit
    #[arg(long)]
    pub max_iter: Option<u32>,
    /// Features removed per RFE iteration
    #[arg(long)]
    pub rfe_step: Option<usize>,
    /// Inner folds used by RFE to pick the subset size
    #[arg(long)]
    pub rfe_folds: Option<usize>,
    /// Cross-validation folds
    #[arg(long)]
    pub folds: Option<usize>,
    /// Bootstrap resamples for the confidence interval
    #[arg(long)]
    pub bootstraps: Option<usize>,
}

impl Tuning {
    /// Flag, then config file, then library default; validated.
    pub fn resolve(&self, cfg: &RunConfig) -> Result<EvalConfig, CliError> {
        let d = EvalConfig::default();
        let e = EvalConfig {
            folds: self.folds.or(cfg.folds).unwrap_or(d.folds),
            bootstraps: self.bootstraps.or(cfg.bootstraps).unwrap_or(d.bootstraps),
            beta: self.beta.or(cfg.beta).unwrap_or(d.beta),
            c: self.c.or(cfg.c).unwrap_or(d.c),
            lambda: self.lambda.or(cfg.lambda).unwrap_or(d.lambda),
            tol: self.tol.or(cfg.tol).unwrap_or(d.tol),
            max_iter: self.max_iter.or(cfg.max_iter).unwrap_or(d.max_iter),
            rfe_step: self.rfe_step.or(cfg.rfe_step).unwrap_or(d.rfe_step),
            rfe_folds: self.rfe_folds.or(cfg.rfe_folds).unwrap_or(d.rfe_folds),
        };
        e.validate()?;
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_defaults_fill_the_rest() {
        let cfg: RunConfig = serde_json::from_str(r#"{"folds": 4, "C": 2.5, "seed": 9}"#).unwrap();
        let t = Tuning { c: Some(0.5), ..Default::default() };
        let e = t.resolve(&cfg).unwrap();
        assert_eq!((e.folds, e.c, e.bootstraps), (4, 0.5, 100));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"fold": 4}"#).is_err());
        let cfg = RunConfig { folds: Some(1), ..Default::default() };
        assert!(matches!(Tuning::default().resolve(&cfg), Err(CliError::Invalid(_))));
        let cfg = RunConfig { model: Some("knn".into()), ..Default::default() };
        assert!(cfg.model(None).is_err());
    }
}
