//! Exit-code contract: 0 ok, 1 model or classification failure, 2 I/O,
//! 3 validation.

use std::path::Path;

use thiserror::Error;
use vulnscore::corpus::DatasetError;
use vulnscore::eval::EvalError;
use vulnscore::extract::AssembleError;
use vulnscore::findings::FindingsError;
use vulnscore::learn::{LearnError, ModelError};
use vulnscore::manifest::ManifestError;
use vulnscore::source::SourceError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Model(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Model(_) => 1,
            CliError::Io(_) => 2,
            CliError::Invalid(_) => 3,
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    /// Prefixes the message with the file it came from, keeping the class.
    pub fn in_file(self, path: &Path) -> Self {
        let at = |m: String| format!("{}: {m}", path.display());
        match self {
            CliError::Model(m) => CliError::Model(at(m)),
            CliError::Io(m) if m.contains(&path.display().to_string()) => CliError::Io(m),
            CliError::Io(m) => CliError::Io(at(m)),
            CliError::Invalid(m) => CliError::Invalid(at(m)),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        match e {
            ManifestError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<FindingsError> for CliError {
    fn from(e: FindingsError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<SourceError> for CliError {
    fn from(e: SourceError) -> Self {
        match e {
            SourceError::Io { .. } | SourceError::NotADirectory(_) | SourceError::MissingManifest => {
                CliError::Io(e.to_string())
            }
        }
    }
}

impl From<AssembleError> for CliError {
    fn from(e: AssembleError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// A model file that cannot be read is I/O; one that cannot be parsed is
/// invalid input.
impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Io { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::SingleClass | LearnError::SingularScatter => CliError::Model(e.to_string()),
            LearnError::EmptyMask | LearnError::UnknownFeature(_) | LearnError::Invalid(_) => {
                CliError::Invalid(e.to_string())
            }
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Learn(l) => l.into(),
            EvalError::Invalid(_) => CliError::Invalid(e.to_string()),
            EvalError::EmptyDataset | EvalError::SingleClass => CliError::Model(e.to_string()),
        }
    }
}
