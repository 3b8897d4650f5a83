//! Feature space, labeled instances, and the on-disk dataset format.
//!
//! Every feature lives in one of three layers: analyzer findings (`l1.*`),
//! metrics parsed from source (`l2.*`) and project metadata (`l3.*`).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsutil;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Layer {
    L1,
    L2,
    L3,
}

impl Layer {
    pub fn prefix(self) -> &'static str {
        match self {
            Layer::L1 => "l1.",
            Layer::L2 => "l2.",
            Layer::L3 => "l3.",
        }
    }

    pub fn of_name(name: &str) -> Option<Layer> {
        [Layer::L1, Layer::L2, Layer::L3]
            .into_iter()
            .find(|l| name.starts_with(l.prefix()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Count,
    Binary,
    Ordinal,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub name: String,
    pub layer: Layer,
    pub kind: FeatureKind,
    pub description: String,
    /// Inclusive bounds for ordinal features.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[i64; 2]>,
}

impl FeatureDescriptor {
    fn new(name: &str, kind: FeatureKind, description: &str) -> Self {
        FeatureDescriptor {
            name: name.to_string(),
            layer: Layer::of_name(name).expect("canonical names carry a layer prefix"),
            kind,
            description: description.to_string(),
            range: None,
        }
    }

    fn ordinal(name: &str, lo: i64, hi: i64, description: &str) -> Self {
        FeatureDescriptor {
            range: Some([lo, hi]),
            ..Self::new(name, FeatureKind::Ordinal, description)
        }
    }
}

/// Ordered list of feature descriptors. Order is the column order of every
/// design matrix built from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<FeatureDescriptor>", into = "Vec<FeatureDescriptor>")]
pub struct FeatureDictionary {
    descriptors: Vec<FeatureDescriptor>,
    index: HashMap<String, usize>,
}

impl From<Vec<FeatureDescriptor>> for FeatureDictionary {
    fn from(descriptors: Vec<FeatureDescriptor>) -> Self {
        let mut index = HashMap::with_capacity(descriptors.len());
        for (i, d) in descriptors.iter().enumerate() {
            index.entry(d.name.clone()).or_insert(i);
        }
        FeatureDictionary { descriptors, index }
    }
}

impl From<FeatureDictionary> for Vec<FeatureDescriptor> {
    fn from(d: FeatureDictionary) -> Self {
        d.descriptors
    }
}

#[derive(Debug, Error, PartialEq)]
#[error("feature `{0}` is already defined")]
pub struct DuplicateFeature(pub String);

impl FeatureDictionary {
    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &FeatureDescriptor> {
        self.descriptors.iter()
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn get(&self, name: &str) -> Option<&FeatureDescriptor> {
        self.index.get(name).map(|&i| &self.descriptors[i])
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Appends a user-defined feature. Existing columns never move.
    pub fn push(&mut self, descriptor: FeatureDescriptor) -> Result<(), DuplicateFeature> {
        if self.index.contains_key(&descriptor.name) {
            return Err(DuplicateFeature(descriptor.name));
        }
        self.index.insert(descriptor.name.clone(), self.descriptors.len());
        self.descriptors.push(descriptor);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.descriptors.iter().map(|d| d.name.as_str())
    }

    pub fn layer_count(&self, layer: Layer) -> usize {
        self.descriptors.iter().filter(|d| d.layer == layer).count()
    }
}

/// The canonical 25-feature dictionary: 6 layer-1, 9 layer-2 and 10 layer-3
/// features in that order.
pub fn default_dictionary() -> FeatureDictionary {
    use FeatureKind::*;
    let d = FeatureDescriptor::new;
    let ord = FeatureDescriptor::ordinal;
    FeatureDictionary::from(vec![
        d("l1.buffer_write", Count, "write operations on buffers (strings, integers)"),
        d("l1.null_deref", Count, "NULL pointer dereferences"),
        d("l1.use_after_free", Count, "access to storage that may have been deallocated"),
        d("l1.memory_leak", Count, "memory leaks"),
        d("l1.stack_return", Count, "returning a pointer to stack-allocated storage"),
        d("l1.use_before_def", Count, "value of a location used before it is defined"),
        d("l2.safe_lib_calls", Count, "calls to bounds-checking string/buffer routines"),
        d("l2.branch_count", Count, "if statements, case labels and ternary operators"),
        d("l2.branch_max_depth", Count, "maximum nesting depth of if statements"),
        d("l2.loop_count", Count, "for, while and do loops"),
        d("l2.is_server", Binary, "server (1) or client (0) application"),
        d("l2.alloc_calls", Count, "calls to malloc, calloc and realloc"),
        d("l2.sloc", Count, "source lines of code"),
        d("l2.recursive_fns", Count, "functions on a call-graph cycle"),
        d("l2.unsafe_lib_calls", Count, "calls to unchecked string/buffer routines"),
        d("l3.code_age_months", Count, "age of the code in whole months"),
        d("l3.committers", Count, "number of committers"),
        ord("l3.popularity_program", 0, 4, "popularity of the program"),
        ord("l3.popularity_platform", 0, 4, "popularity of the platform it runs on"),
        ord("l3.platform_kind", 0, 3, "kind of platform: other, embedded, desktop, server"),
        ord("l3.dev_reputation", 0, 4, "reputation of the developers"),
        d("l3.security_related", Binary, "relation to security applications"),
        ord("l3.code_status", 0, 2, "status of the code: abandoned, maintenance, active"),
        d("l3.is_legacy", Binary, "legacy (1) or in development (0)"),
        d("l3.exploit_history", Count, "count of prior published advisories"),
    ])
}

/// Sparse feature values keyed by name. Absent keys mean "missing".
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(BTreeMap<String, f64>);

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) {
        self.0.insert(name.into(), value);
    }

    pub fn remove(&mut self, name: &str) -> Option<f64> {
        self.0.remove(name)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Copies every key of `other` into `self`, overwriting on collision.
    pub fn merge(&mut self, other: &FeatureVector) {
        for (k, v) in other.iter() {
            self.set(k, v);
        }
    }
}

impl FromIterator<(String, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        FeatureVector(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<(&'a str, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (&'a str, f64)>>(iter: I) -> Self {
        FeatureVector(iter.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Vulnerable,
    BenignFlaw,
}

impl Label {
    /// +1 for vulnerable, -1 for benign flaws.
    pub fn sign(self) -> f64 {
        match self {
            Label::Vulnerable => 1.0,
            Label::BenignFlaw => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Vulnerable => "vulnerable",
            Label::BenignFlaw => "benign_flaw",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub label: Label,
    pub features: FeatureVector,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dictionary: FeatureDictionary,
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn new(dictionary: FeatureDictionary) -> Self {
        Dataset {
            dictionary,
            instances: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.instances.iter().filter(|i| i.label == label).count()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.instances.iter().map(|i| i.label).collect()
    }

    /// A new dataset holding the given instances, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            dictionary: self.dictionary.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let file = DatasetFileRef {
            schema_version: SCHEMA_VERSION,
            dictionary: self.dictionary.descriptors(),
            instances: &self.instances,
        };
        let mut s = serde_json::to_string_pretty(&file).expect("dataset serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Dataset, DatasetError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| DatasetError::Malformed(e.to_string()))?;
        match value.get("schema_version") {
            Some(serde_json::Value::String(v)) if v == SCHEMA_VERSION => {}
            Some(other) => {
                let found = other.as_str().map(str::to_string).unwrap_or_else(|| other.to_string());
                return Err(DatasetError::SchemaVersion(found));
            }
            None => return Err(DatasetError::SchemaVersion("<missing>".into())),
        }
        let file: DatasetFile =
            serde_json::from_value(value).map_err(|e| DatasetError::Malformed(e.to_string()))?;
        let dictionary = FeatureDictionary::from(file.dictionary);
        for inst in &file.instances {
            if let Some((name, _)) = inst.features.iter().find(|(k, _)| !dictionary.contains(k)) {
                return Err(DatasetError::UnknownFeature {
                    instance: inst.id.clone(),
                    feature: name.to_string(),
                });
            }
        }
        Ok(Dataset {
            dictionary,
            instances: file.instances,
        })
    }
}

#[derive(Serialize)]
struct DatasetFileRef<'a> {
    schema_version: &'a str,
    dictionary: &'a [FeatureDescriptor],
    instances: &'a [Instance],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    #[allow(dead_code)]
    schema_version: String,
    dictionary: Vec<FeatureDescriptor>,
    instances: Vec<Instance>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed dataset: {0}")]
    Malformed(String),
    #[error("unsupported schema_version `{0}` (expected \"1\")")]
    SchemaVersion(String),
    #[error("instance `{instance}` uses unknown feature `{feature}`")]
    UnknownFeature { instance: String, feature: String },
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Dataset::from_json(&text)
}

pub fn save_dataset(d: &Dataset, path: impl AsRef<Path>) -> Result<(), DatasetError> {
    let path = path.as_ref();
    fsutil::write_atomic(path, d.to_json().as_bytes()).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// One broken rule, located by instance and feature where applicable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feature: Option<String>,
    pub rule: String,
}

impl Violation {
    fn new(instance: Option<&str>, feature: Option<&str>, rule: impl Into<String>) -> Self {
        Violation {
            instance: instance.map(str::to_string),
            feature: feature.map(str::to_string),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.instance, &self.feature) {
            (Some(i), Some(n)) => write!(f, "{i}/{n}: {}", self.rule),
            (Some(i), None) => write!(f, "{i}: {}", self.rule),
            (None, Some(n)) => write!(f, "{n}: {}", self.rule),
            (None, None) => f.write_str(&self.rule),
        }
    }
}

fn valid_feature_name(name: &str) -> bool {
    let Some(rest) = name
        .strip_prefix("l1.")
        .or_else(|| name.strip_prefix("l2."))
        .or_else(|| name.strip_prefix("l3."))
    else {
        return false;
    };
    !rest.is_empty()
        && rest
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Checks a single value against its descriptor's kind.
pub fn check_value(desc: &FeatureDescriptor, v: f64) -> Option<String> {
    if !v.is_finite() {
        return Some("value must be finite".into());
    }
    match desc.kind {
        FeatureKind::Count if v < 0.0 => Some("count must be non-negative".into()),
        FeatureKind::Count if v.fract() != 0.0 => Some("count must be an integer".into()),
        FeatureKind::Binary if v != 0.0 && v != 1.0 => Some("binary must be 0 or 1".into()),
        FeatureKind::Ordinal if v.fract() != 0.0 => Some("ordinal must be an integer".into()),
        FeatureKind::Ordinal => match desc.range {
            Some([lo, hi]) if v < lo as f64 || v > hi as f64 => {
                Some(format!("ordinal must lie in [{lo}, {hi}]"))
            }
            _ => None,
        },
        _ => None,
    }
}

/// Lists every broken invariant. Empty means the dataset is well formed.
pub fn validate_dataset(d: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut names = HashSet::new();
    for desc in d.dictionary.iter() {
        let n = Some(desc.name.as_str());
        if !names.insert(desc.name.as_str()) {
            out.push(Violation::new(None, n, "duplicate feature name"));
        }
        if !valid_feature_name(&desc.name) {
            out.push(Violation::new(None, n, "name must match l[123].[a-z0-9_]+"));
        } else if Layer::of_name(&desc.name) != Some(desc.layer) {
            out.push(Violation::new(None, n, "name prefix does not match layer"));
        }
        if let Some([lo, hi]) = desc.range {
            if lo > hi {
                out.push(Violation::new(None, n, "ordinal range is inverted"));
            }
        }
    }

    let mut ids = HashSet::new();
    for inst in &d.instances {
        let id = Some(inst.id.as_str());
        if inst.id.is_empty() {
            out.push(Violation::new(id, None, "instance id must not be empty"));
        }
        if !ids.insert(inst.id.as_str()) {
            out.push(Violation::new(id, None, "duplicate instance id"));
        }
        for (name, v) in inst.features.iter() {
            match d.dictionary.get(name) {
                None => out.push(Violation::new(id, Some(name), "unknown feature")),
                Some(desc) => {
                    if let Some(rule) = check_value(desc, v) {
                        out.push(Violation::new(id, Some(name), rule));
                    }
                }
            }
        }
    }
    out
}
