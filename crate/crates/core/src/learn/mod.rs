//! Linear classifiers over the joint feature space.

pub mod design;
pub mod fda;
pub mod model;
pub mod standardize;
pub mod svm;

use thiserror::Error;

pub use design::{
    build_design_matrix, build_design_matrix_rows, label_of_sign, layer3_instance_weights,
    DesignMatrix, FeatureMask,
};
pub use fda::{train_fda, DEFAULT_LAMBDA};
pub use model::{load_model, save_model, ModelError, ModelKind, TrainedModel, TrainingInfo};
pub use standardize::Standardizer;
pub use svm::{fit_svm, train_svm, SvmFit, SvmParams};

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("feature mask is empty")]
    EmptyMask,
    #[error("training data must contain both classes")]
    SingleClass,
    #[error("unknown feature {0}")]
    UnknownFeature(String),
    #[error("within-class scatter could not be inverted")]
    SingularScatter,
    #[error("{0}")]
    Invalid(String),
}

/// Classifier choice plus its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainParams {
    Fda { lambda: f64 },
    Svm(SvmParams),
}

impl TrainParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainParams::Fda { .. } => ModelKind::Fda,
            TrainParams::Svm(_) => ModelKind::Svm,
        }
    }

    pub fn default_for(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Fda => TrainParams::Fda {
                lambda: DEFAULT_LAMBDA,
            },
            ModelKind::Svm => TrainParams::Svm(SvmParams::default()),
        }
    }
}

pub fn train(m: &DesignMatrix, params: &TrainParams) -> Result<TrainedModel, LearnError> {
    match params {
        TrainParams::Fda { lambda } => train_fda(m, *lambda),
        TrainParams::Svm(p) => train_svm(m, p),
    }
}
