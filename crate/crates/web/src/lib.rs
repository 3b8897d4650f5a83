//! WebAssembly entry points for the static demo page in `www/`.
//!
//! Each export takes and returns JSON strings so the page needs no
//! generated type bindings. The plain functions behind them are public and
//! tested natively.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use vulnscore::corpus::Label;
use vulnscore::eval::{render_table, run_table1_grid, EvalConfig, ExperimentReport};
use vulnscore::learn::{self, label_of_sign, DesignMatrix, ModelKind, TrainParams, SvmParams};
use vulnscore::source::{build_call_graph, callgraph::recursive_functions, measure_units, tokenize_path, FileMetrics};
use vulnscore::synth::{generate_corpus, SynthConfig};

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub file: FileMetrics,
    /// Functions on a call-graph cycle, sorted.
    pub recursive: Vec<String>,
}

/// Layer-2 source metrics of one C/C++ file.
pub fn analyze(source: &str) -> Analysis {
    let unit = tokenize_path("input.c", source);
    let recursive = recursive_functions(&build_call_graph([&unit])).into_iter().collect();
    let (_, mut files) = measure_units(std::slice::from_ref(&unit));
    Analysis {
        file: files.remove(0),
        recursive,
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct ToyPoint {
    pub x: f64,
    pub y: f64,
    pub label: Label,
}

/// A line in the plane: `w[0] * x + w[1] * y + b >= 0` is vulnerable.
#[derive(Debug, Serialize)]
pub struct ToyFit {
    pub w: [f64; 2],
    pub b: f64,
    pub converged: bool,
    pub training_accuracy: f64,
}

/// Fits FDA or a linear SVM to labeled 2-D points.
pub fn fit_points(points: &[ToyPoint], kind: ModelKind, c: f64) -> Result<ToyFit, String> {
    let m = DesignMatrix {
        features: vec!["l2.x".into(), "l2.y".into()],
        rows: points.iter().map(|p| vec![p.x, p.y]).collect(),
        labels: points.iter().map(|p| p.label.sign()).collect(),
        weights: vec![1.0; points.len()],
        imputation: vec![0.0; 2],
    };
    let params = match kind {
        ModelKind::Fda => TrainParams::default_for(kind),
        ModelKind::Svm => TrainParams::Svm(SvmParams { c, ..SvmParams::default() }),
    };
    let model = learn::train(&m, &params).map_err(|e| e.to_string())?;
    let (w, b) = model.raw_coefficients();
    let correct = points
        .iter()
        .zip(&m.rows)
        .filter(|(p, r)| label_of_sign(model.decision_row(r)) == p.label)
        .count();
    Ok(ToyFit {
        w: [w[0], w[1]],
        b,
        converged: model.training.converged,
        training_accuracy: correct as f64 / points.len() as f64,
    })
}

#[derive(Debug, Serialize)]
pub struct GridRun {
    pub table: String,
    pub report: ExperimentReport,
}

/// The full model-by-subset grid on a freshly generated synthetic corpus.
pub fn grid(seed: u64, instances: usize, informative_l3: bool, bootstraps: usize) -> Result<GridRun, String> {
    if instances < 4 {
        return Err("at least 4 instances are needed".into());
    }
    let d = generate_corpus(&SynthConfig {
        instances,
        informative_l3,
        ..SynthConfig::new(seed)
    });
    let cfg = EvalConfig {
        bootstraps,
        ..EvalConfig::default()
    };
    let report = run_table1_grid(&d, seed, &cfg).map_err(|e| e.to_string())?;
    Ok(GridRun {
        table: render_table(&report),
        report,
    })
}

fn to_js<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("plain data serializes")
}

#[wasm_bindgen]
pub fn analyze_c(source: &str) -> String {
    to_js(&analyze(source))
}

/// `points_json` is an array of `{x, y, label}`; `model` is `fda` or `svm`.
#[wasm_bindgen]
pub fn fit_toy(points_json: &str, model: &str, c: f64) -> Result<String, JsError> {
    let points: Vec<ToyPoint> = serde_json::from_str(points_json).map_err(|e| JsError::new(&e.to_string()))?;
    let kind: ModelKind = model.parse().map_err(|e: String| JsError::new(&e))?;
    fit_points(&points, kind, c).map(|f| to_js(&f)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn run_grid(seed: u32, instances: u32, informative_l3: bool, bootstraps: u32) -> Result<String, JsError> {
    grid(u64::from(seed), instances as usize, informative_l3, bootstraps as usize)
        .map(|g| to_js(&g))
        .map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analysis_counts_branches_and_recursion() {
        let a = analyze(
            "int fact(int n) {\n  if (n < 2) return 1;\n  return n * fact(n - 1);\n}\n\
             void copy(char *d, const char *s) { strcpy(d, s); }\n",
        );
        assert_eq!(a.file.metrics.branch_count, 1);
        assert_eq!(a.file.metrics.unsafe_lib_calls, 1);
        assert_eq!(a.file.metrics.recursive_fns, 1);
        assert_eq!(a.recursive, ["fact"]);
        let js: serde_json::Value = serde_json::from_str(&analyze_c("int main(void) { return 0; }")).unwrap();
        assert_eq!(js["file"]["metrics"]["l2.sloc"].as_f64(), Some(1.0));
    }

    fn pt(x: f64, y: f64, label: Label) -> ToyPoint {
        ToyPoint { x, y, label }
    }

    #[test]
    fn toy_fit_separates_two_clusters() {
        let points = [
            pt(1.0, 1.0, Label::Vulnerable),
            pt(1.5, 2.0, Label::Vulnerable),
            pt(2.0, 1.2, Label::Vulnerable),
            pt(-1.0, -1.0, Label::BenignFlaw),
            pt(-1.5, -0.5, Label::BenignFlaw),
            pt(-0.8, -2.0, Label::BenignFlaw),
        ];
        for kind in [ModelKind::Fda, ModelKind::Svm] {
            let f = fit_points(&points, kind, 1.0).unwrap();
            assert_eq!(f.training_accuracy, 1.0);
            assert!(f.w[0] > 0.0 && f.w[1] > 0.0);
        }
        assert!(fit_points(&points[..3], ModelKind::Svm, 1.0).is_err());
    }

    #[test]
    fn toy_fit_reads_page_json() {
        let json = r#"[{"x":0,"y":1,"label":"vulnerable"},{"x":0,"y":-1,"label":"benign_flaw"}]"#;
        let fit: serde_json::Value = serde_json::from_str(&fit_toy(json, "svm", 1.0).unwrap()).unwrap();
        assert!(fit["w"][1].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn grid_renders_six_cells() {
        let g = grid(3, 24, true, 5).unwrap();
        assert_eq!(g.report.cells.len(), 6);
        assert!(g.table.contains("RFE"));
        assert!(grid(3, 2, true, 5).is_err());
    }
}
