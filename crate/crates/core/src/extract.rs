//! One project in, one unlabeled feature fragment out; labeled fragments
//! in, one dataset out.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{default_dictionary, Dataset, FeatureVector, Instance, Label, Layer, SCHEMA_VERSION};
use crate::findings::{aggregate_layer1, FindingsReport};
use crate::manifest::{encode_layer3, ProjectManifest};
use crate::source::{extract_layer2, FileMetrics, SourceError};

/// Feature values of a single project, before it is given a label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fragment {
    pub schema_version: String,
    pub id: String,
    pub features: FeatureVector,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

impl Fragment {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("fragment serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, AssembleError> {
        let f: Fragment =
            serde_json::from_str(text).map_err(|e| AssembleError::Malformed(e.to_string()))?;
        if f.schema_version != SCHEMA_VERSION {
            return Err(AssembleError::SchemaVersion(f.schema_version));
        }
        Ok(f)
    }
}

/// Replaces every layer-1 count by `min(count, 1)`.
pub fn binarize_layer1(features: &mut FeatureVector) {
    let l1: Vec<(String, f64)> = features
        .iter()
        .filter(|(n, _)| Layer::of_name(n) == Some(Layer::L1))
        .map(|(n, v)| (n.to_string(), v.min(1.0)))
        .collect();
    for (n, v) in l1 {
        features.set(n, v);
    }
}

/// Combines analyzer findings, source metrics and manifest encoding into a
/// fragment named after the project. Also returns per-file metrics.
pub fn extract_fragment(
    source: &Path,
    reports: &[FindingsReport],
    manifest: &ProjectManifest,
    binarize_l1: bool,
) -> Result<(Fragment, Vec<FileMetrics>), SourceError> {
    let l2 = extract_layer2(source, Some(manifest))?;
    let mut features = aggregate_layer1(reports);
    if binarize_l1 {
        binarize_layer1(&mut features);
    }
    features.merge(&l2.features);
    features.merge(&encode_layer3(manifest));
    let tools: BTreeSet<&str> = reports.iter().map(|r| r.tool.as_str()).collect();
    let provenance = BTreeMap::from([
        ("analyzers".to_string(), tools.into_iter().collect::<Vec<_>>().join(",")),
        ("binarized_l1".to_string(), binarize_l1.to_string()),
        ("source_files".to_string(), l2.files.len().to_string()),
    ]);
    Ok((
        Fragment {
            schema_version: SCHEMA_VERSION.to_string(),
            id: manifest.project_name.clone(),
            features,
            provenance,
        },
        l2.files,
    ))
}

#[derive(Debug, Error)]
pub enum AssembleError {
    #[error("malformed fragment: {0}")]
    Malformed(String),
    #[error("unsupported fragment schema_version `{0}` (expected \"1\")")]
    SchemaVersion(String),
    #[error("duplicate instance id `{0}`")]
    DuplicateId(String),
    #[error("instance `{instance}` uses unknown feature `{feature}`")]
    UnknownFeature { instance: String, feature: String },
}

/// Labeled dataset over the default dictionary, vulnerable fragments first.
pub fn assemble_dataset(
    vulnerable: Vec<Fragment>,
    benign: Vec<Fragment>,
) -> Result<Dataset, AssembleError> {
    let mut d = Dataset::new(default_dictionary());
    let mut seen = BTreeSet::new();
    let labeled = vulnerable
        .into_iter()
        .map(|f| (Label::Vulnerable, f))
        .chain(benign.into_iter().map(|f| (Label::BenignFlaw, f)));
    for (label, f) in labeled {
        if !seen.insert(f.id.clone()) {
            return Err(AssembleError::DuplicateId(f.id));
        }
        if let Some((n, _)) = f.features.iter().find(|(n, _)| !d.dictionary.contains(n)) {
            return Err(AssembleError::UnknownFeature {
                instance: f.id,
                feature: n.to_string(),
            });
        }
        d.instances.push(Instance {
            id: f.id,
            label,
            features: f.features,
            provenance: f.provenance,
        });
    }
    Ok(d)
}
