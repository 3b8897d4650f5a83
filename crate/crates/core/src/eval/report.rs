use std::fmt::Write as _;

use serde::Serialize;

use super::grid::{CellResult, Subset};
use super::split::SplitPlan;
use super::EvalConfig;
use crate::corpus::{Dataset, Label, SCHEMA_VERSION};
use crate::learn::ModelKind;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub seed: u64,
    pub config: EvalConfig,
    pub instances: usize,
    pub vulnerable: usize,
    pub benign_flaw: usize,
    pub folds: usize,
    pub train_size: usize,
    pub test_size: usize,
    /// FDA row then SVM row, columns L1+L2, all, RFE.
    pub cells: Vec<CellResult>,
    pub warnings: Vec<String>,
}

impl ExperimentReport {
    pub fn new(d: &Dataset, plan: &SplitPlan, cfg: &EvalConfig, cells: Vec<CellResult>) -> Self {
        let mut warnings = plan.warnings.clone();
        for c in &cells {
            for w in &c.warnings {
                let line = format!("{} {}: {w}", c.model.as_str(), c.subset.as_str());
                if !warnings.contains(&line) {
                    warnings.push(line);
                }
            }
        }
        ExperimentReport {
            schema_version: SCHEMA_VERSION.to_string(),
            seed: plan.seed,
            config: cfg.clone(),
            instances: d.len(),
            vulnerable: d.count(Label::Vulnerable),
            benign_flaw: d.count(Label::BenignFlaw),
            folds: plan.folds,
            train_size: plan.train.len(),
            test_size: plan.test.len(),
            cells,
            warnings,
        }
    }

    pub fn cell(&self, model: ModelKind, subset: Subset) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.model == model && c.subset == subset)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn fmt_acc(a: f64) -> String {
    format!("{a:.2}")
}

/// Plain-text grid: one row per classifier, one column per feature subset.
pub fn render_table(r: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Classification accuracy, {} instances ({} vulnerable), seed {}",
        r.instances, r.vulnerable, r.seed
    );
    let _ = writeln!(
        out,
        "cv = mean over {} folds (sd); test = holdout of {}",
        r.folds, r.test_size
    );
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<6}{:<24}{:<24}RFE", "", "L1+L2", "all features");
    for kind in [ModelKind::Fda, ModelKind::Svm] {
        let mut cv = format!("{:<6}", kind.as_str().to_uppercase());
        let mut test = format!("{:<6}", "");
        for s in Subset::ALL {
            match r.cell(kind, s) {
                Some(c) => {
                    let _ = write!(cv, "{:<24}", format!("cv {} ({})", fmt_acc(c.mean_acc), fmt_acc(c.fold_std)));
                    let ci = c.ci.map_or(String::new(), |[lo, hi]| format!(" [{}, {}]", fmt_acc(lo), fmt_acc(hi)));
                    let _ = write!(test, "{:<24}", format!("test {}{ci}", fmt_acc(c.test_acc)));
                }
                None => {
                    let _ = write!(cv, "{:<24}", "-");
                    let _ = write!(test, "{:<24}", "");
                }
            }
        }
        let _ = writeln!(out, "{}", cv.trim_end());
        let _ = writeln!(out, "{}", test.trim_end());
    }
    for kind in [ModelKind::Fda, ModelKind::Svm] {
        if let Some(names) = r.cell(kind, Subset::Rfe).and_then(|c| c.selected_features.as_ref()) {
            let _ = writeln!(out);
            let _ = writeln!(out, "{} RFE kept {}: {}", kind.as_str().to_uppercase(), names.len(), names.join(", "));
        }
    }
    if !r.warnings.is_empty() {
        let _ = writeln!(out);
        for w in &r.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
    }
    out
}
