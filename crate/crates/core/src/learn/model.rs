use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::design::label_of_sign;
use super::standardize::Standardizer;
use crate::corpus::{FeatureVector, Label, SCHEMA_VERSION};
use crate::fsutil::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Fda,
    Svm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Fda => "fda",
            ModelKind::Svm => "svm",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "fda" => Ok(ModelKind::Fda),
            "svm" => Ok(ModelKind::Svm),
            _ => Err(format!("unknown classifier {s:?}; expected fda or svm")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingInfo {
    pub converged: bool,
    pub epochs: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_violation: Option<f64>,
}

/// A fitted linear classifier. The decision value is `w . z + b` where `z`
/// is the standardized, imputed feature row; non-negative means vulnerable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainedModel {
    pub kind: ModelKind,
    pub features: Vec<String>,
    pub w: Vec<f64>,
    pub b: f64,
    pub standardizer: Standardizer,
    pub imputation: Vec<f64>,
    pub hyperparams: BTreeMap<String, f64>,
    pub training: TrainingInfo,
}

#[derive(Serialize)]
struct ModelOut<'a> {
    schema_version: &'a str,
    #[serde(flatten)]
    model: &'a TrainedModel,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("unsupported model schema_version {0:?}")]
    SchemaVersion(String),
}

impl TrainedModel {
    /// Always predicts `label`; used when a training split holds one class.
    pub fn constant(kind: ModelKind, features: Vec<String>, label: Label) -> Self {
        let p = features.len();
        TrainedModel {
            kind,
            w: vec![0.0; p],
            b: label.sign(),
            standardizer: Standardizer {
                mean: vec![0.0; p],
                sd: vec![1.0; p],
                zero_var: vec![true; p],
            },
            imputation: vec![0.0; p],
            features,
            hyperparams: BTreeMap::new(),
            training: TrainingInfo {
                converged: true,
                epochs: 0,
                dual_objective: None,
                max_violation: None,
            },
        }
    }

    /// Decision value for a raw row in `features` order.
    pub fn decision_row(&self, row: &[f64]) -> f64 {
        row.iter()
            .enumerate()
            .map(|(j, &v)| self.w[j] * self.standardizer.transform_one(j, v))
            .sum::<f64>()
            + self.b
    }

    /// Decision value for a sparse vector; absent features take the
    /// training imputation value.
    pub fn decision_value(&self, x: &FeatureVector) -> f64 {
        let row: Vec<f64> = self
            .features
            .iter()
            .zip(&self.imputation)
            .map(|(n, &fill)| x.get(n).unwrap_or(fill))
            .collect();
        self.decision_row(&row)
    }

    pub fn predict(&self, x: &FeatureVector) -> Label {
        label_of_sign(self.decision_value(x))
    }

    /// Weights and bias in raw feature units, so that
    /// `decision_row(x) == raw_w . x + raw_b` for any row.
    pub fn raw_coefficients(&self) -> (Vec<f64>, f64) {
        let s = &self.standardizer;
        let mut b = self.b;
        let w = (0..self.w.len())
            .map(|j| {
                if s.zero_var[j] {
                    0.0
                } else {
                    b -= self.w[j] * s.mean[j] / s.sd[j];
                    self.w[j] / s.sd[j]
                }
            })
            .collect();
        (w, b)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&ModelOut {
            schema_version: SCHEMA_VERSION,
            model: self,
        })
        .expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let mut v: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
        let obj = v
            .as_object_mut()
            .ok_or_else(|| ModelError::Malformed("expected a JSON object".into()))?;
        match obj.remove("schema_version") {
            Some(serde_json::Value::String(s)) if s == SCHEMA_VERSION => {}
            Some(serde_json::Value::String(s)) => return Err(ModelError::SchemaVersion(s)),
            Some(other) => return Err(ModelError::SchemaVersion(other.to_string())),
            None => return Err(ModelError::Malformed("missing schema_version".into())),
        }
        let m: TrainedModel =
            serde_json::from_value(v).map_err(|e| ModelError::Malformed(e.to_string()))?;
        let p = m.features.len();
        let s = &m.standardizer;
        if [m.w.len(), m.imputation.len(), s.mean.len(), s.sd.len(), s.zero_var.len()]
            .iter()
            .any(|&l| l != p)
        {
            return Err(ModelError::Malformed(
                "coefficient vectors do not match the feature list".into(),
            ));
        }
        Ok(m)
    }
}

pub fn load_model(path: &Path) -> Result<TrainedModel, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    TrainedModel::from_json(&text)
}

pub fn save_model(path: &Path, m: &TrainedModel) -> Result<(), ModelError> {
    write_atomic(path, m.to_json().as_bytes()).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}
