//! Classifying flawed C/C++ code bases as exploitable vulnerabilities or
//! benign flaws.
//!
//! Features come in three layers: static-analyzer findings
//! ([`findings`]), metrics parsed from source ([`source`]) and project
//! metadata ([`manifest`]). They share one feature space ([`corpus`]) and
//! feed two linear classifiers, Fisher discriminant analysis and a weighted
//! soft-margin SVM ([`learn`]). [`eval`] holds recursive feature
//! elimination and the evaluation grid; [`synth`] generates labeled
//! corpora with known signal placement, and [`extract`] ties the three
//! extractors together.

pub mod corpus;
pub mod eval;
pub mod extract;
pub mod findings;
pub mod fsutil;
pub mod learn;
pub mod manifest;
pub mod source;
pub mod synth;

pub use corpus::{
    default_dictionary, load_dataset, save_dataset, validate_dataset, Dataset, FeatureDescriptor,
    FeatureDictionary, FeatureKind, FeatureVector, Instance, Label, Layer,
};
