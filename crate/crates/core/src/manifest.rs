//! Project metadata manifest and its layer-3 encoding.
//!
//! Qualitative judgments (popularity, reputation) are recorded by hand on
//! a 0–4 scale; this module only validates and encodes them.

use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::corpus::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlatformKind {
    Other,
    Embedded,
    Desktop,
    Server,
}

impl PlatformKind {
    pub fn ordinal(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeStatus {
    Abandoned,
    Maintenance,
    Active,
}

impl CodeStatus {
    pub fn ordinal(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectManifest {
    pub schema_version: String,
    pub project_name: String,
    pub first_release_date: NaiveDate,
    pub snapshot_date: NaiveDate,
    pub committers: u64,
    pub popularity_program: u8,
    pub popularity_platform: u8,
    pub platform_kind: PlatformKind,
    pub dev_reputation: u8,
    pub security_related: bool,
    pub code_status: CodeStatus,
    pub is_legacy: bool,
    pub exploit_history: u64,
    pub is_server_app: bool,
}

const FIELDS: &[&str] = &[
    "schema_version",
    "project_name",
    "first_release_date",
    "snapshot_date",
    "committers",
    "popularity_program",
    "popularity_platform",
    "platform_kind",
    "dev_reputation",
    "security_related",
    "code_status",
    "is_legacy",
    "exploit_history",
    "is_server_app",
];

const ORDINAL_FIELDS: &[&str] = &["popularity_program", "popularity_platform", "dev_reputation"];

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed manifest: {0}")]
    Malformed(String),
    #[error("unknown manifest key `{0}`")]
    UnknownKey(String),
    #[error("missing required field `{0}`")]
    MissingField(String),
    #[error("unsupported schema_version `{0}` (expected \"1\")")]
    SchemaVersion(String),
    #[error("`{field}` = {value} is outside 0..=4")]
    OutOfRange { field: String, value: String },
    #[error("`{field}` is not a valid YYYY-MM-DD date: {value}")]
    BadDate { field: String, value: String },
    #[error("snapshot_date {snapshot} precedes first_release_date {first}")]
    DateInversion { first: NaiveDate, snapshot: NaiveDate },
    #[error("invalid value for `{field}`: {message}")]
    InvalidField { field: String, message: String },
}

impl ProjectManifest {
    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| ManifestError::Malformed(e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(ManifestError::Malformed("expected a JSON object".into()));
        };
        Self::from_object(obj)
    }

    fn from_object(obj: Map<String, Value>) -> Result<Self, ManifestError> {
        if let Some(k) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
            return Err(ManifestError::UnknownKey(k.clone()));
        }
        if let Some(f) = FIELDS.iter().find(|f| !obj.contains_key(**f)) {
            return Err(ManifestError::MissingField(f.to_string()));
        }
        match &obj["schema_version"] {
            Value::String(s) if s == "1" => {}
            other => return Err(ManifestError::SchemaVersion(other.to_string())),
        }
        for f in ORDINAL_FIELDS {
            let v = &obj[*f];
            if !v.as_u64().is_some_and(|n| n <= 4) {
                return Err(ManifestError::OutOfRange {
                    field: f.to_string(),
                    value: v.to_string(),
                });
            }
        }
        for f in ["first_release_date", "snapshot_date"] {
            let v = &obj[f];
            let ok = v
                .as_str()
                .is_some_and(|s| NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok());
            if !ok {
                return Err(ManifestError::BadDate {
                    field: f.into(),
                    value: v.to_string(),
                });
            }
        }
        for (field, value) in &obj {
            let single = Map::from_iter([(field.clone(), value.clone())]);
            if let Err(e) = check_field(Value::Object(single)) {
                return Err(ManifestError::InvalidField {
                    field: field.clone(),
                    message: e,
                });
            }
        }
        let m: ProjectManifest = serde_json::from_value(Value::Object(obj))
            .map_err(|e| ManifestError::Malformed(e.to_string()))?;
        if m.snapshot_date < m.first_release_date {
            return Err(ManifestError::DateInversion {
                first: m.first_release_date,
                snapshot: m.snapshot_date,
            });
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Type-checks one field in isolation so errors name the field.
fn check_field(single: Value) -> Result<(), String> {
    #[derive(Deserialize)]
    #[allow(dead_code)]
    struct Partial {
        project_name: Option<String>,
        committers: Option<u64>,
        platform_kind: Option<PlatformKind>,
        security_related: Option<bool>,
        code_status: Option<CodeStatus>,
        is_legacy: Option<bool>,
        exploit_history: Option<u64>,
        is_server_app: Option<bool>,
    }
    serde_json::from_value::<Partial>(single)
        .map(|_| ())
        .map_err(|e| e.to_string())
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<ProjectManifest, ManifestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ProjectManifest::from_json(&text)
}

/// Whole calendar months from `from` to `to`; a partial month does not count.
pub fn whole_months(from: NaiveDate, to: NaiveDate) -> i64 {
    let mut months =
        i64::from(to.year() - from.year()) * 12 + i64::from(to.month()) - i64::from(from.month());
    if to.day() < from.day() {
        months -= 1;
    }
    months
}

/// All ten `l3.*` features plus `l2.is_server`.
pub fn encode_layer3(m: &ProjectManifest) -> FeatureVector {
    let b = |v: bool| if v { 1.0 } else { 0.0 };
    [
        (
            "l3.code_age_months",
            whole_months(m.first_release_date, m.snapshot_date) as f64,
        ),
        ("l3.committers", m.committers as f64),
        ("l3.popularity_program", f64::from(m.popularity_program)),
        ("l3.popularity_platform", f64::from(m.popularity_platform)),
        ("l3.platform_kind", f64::from(m.platform_kind.ordinal())),
        ("l3.dev_reputation", f64::from(m.dev_reputation)),
        ("l3.security_related", b(m.security_related)),
        ("l3.code_status", f64::from(m.code_status.ordinal())),
        ("l3.is_legacy", b(m.is_legacy)),
        ("l3.exploit_history", m.exploit_history as f64),
        ("l2.is_server", b(m.is_server_app)),
    ]
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "schema_version": "1",
        "project_name": "netd",
        "first_release_date": "2006-01-15",
        "snapshot_date": "2008-01-15",
        "committers": 7,
        "popularity_program": 3,
        "popularity_platform": 4,
        "platform_kind": "server",
        "dev_reputation": 2,
        "security_related": true,
        "code_status": "active",
        "is_legacy": false,
        "exploit_history": 2,
        "is_server_app": true
    }"#;

    fn with(key: &str, value: &str) -> String {
        let mut v: Value = serde_json::from_str(GOOD).unwrap();
        v[key] = serde_json::from_str(value).unwrap();
        v.to_string()
    }

    #[test]
    fn loads_and_encodes() {
        let m = ProjectManifest::from_json(GOOD).unwrap();
        let f = encode_layer3(&m);
        assert_eq!(f.len(), 11);
        assert_eq!(f.get("l3.code_age_months"), Some(24.0));
        assert_eq!(f.get("l3.security_related"), Some(1.0));
        assert_eq!(f.get("l3.code_status"), Some(2.0));
        assert_eq!(f.get("l3.platform_kind"), Some(3.0));
        assert_eq!(f.get("l2.is_server"), Some(1.0));
        assert_eq!(ProjectManifest::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn ordinal_out_of_range() {
        let err = ProjectManifest::from_json(&with("popularity_program", "7")).unwrap_err();
        assert!(matches!(err, ManifestError::OutOfRange { ref field, .. } if field == "popularity_program"));
        let err = ProjectManifest::from_json(&with("dev_reputation", "-1")).unwrap_err();
        assert!(matches!(err, ManifestError::OutOfRange { .. }));
    }

    #[test]
    fn date_inversion() {
        let err = ProjectManifest::from_json(&with("snapshot_date", "\"2005-12-31\"")).unwrap_err();
        assert!(matches!(err, ManifestError::DateInversion { .. }));
        let err = ProjectManifest::from_json(&with("snapshot_date", "\"2008-02-30\"")).unwrap_err();
        assert!(matches!(err, ManifestError::BadDate { .. }));
    }

    #[test]
    fn unknown_and_missing_keys() {
        let err = ProjectManifest::from_json(&with("homepage", "\"x\"")).unwrap_err();
        assert!(matches!(err, ManifestError::UnknownKey(ref k) if k == "homepage"));
        let mut v: Value = serde_json::from_str(GOOD).unwrap();
        v.as_object_mut().unwrap().remove("committers");
        let err = ProjectManifest::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(err, ManifestError::MissingField(ref k) if k == "committers"));
    }

    #[test]
    fn bad_enum_names_the_field() {
        let err = ProjectManifest::from_json(&with("platform_kind", "\"mainframe\"")).unwrap_err();
        assert!(matches!(err, ManifestError::InvalidField { ref field, .. } if field == "platform_kind"));
        let err = ProjectManifest::from_json(&with("schema_version", "\"2\"")).unwrap_err();
        assert!(matches!(err, ManifestError::SchemaVersion(_)));
    }

    #[test]
    fn month_arithmetic() {
        let d = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        assert_eq!(whole_months(d("2006-01-15"), d("2008-01-15")), 24);
        assert_eq!(whole_months(d("2006-01-15"), d("2008-01-14")), 23);
        assert_eq!(whole_months(d("2007-01-31"), d("2007-02-28")), 0);
        assert_eq!(whole_months(d("2007-03-01"), d("2007-03-01")), 0);
    }

    #[test]
    fn encoding_is_monotone_in_ordinals() {
        let base = ProjectManifest::from_json(GOOD).unwrap();
        for p in 0..4u8 {
            let lo = ProjectManifest { popularity_program: p, ..base.clone() };
            let hi = ProjectManifest { popularity_program: p + 1, ..base.clone() };
            assert!(encode_layer3(&hi).get("l3.popularity_program") > encode_layer3(&lo).get("l3.popularity_program"));
        }
        let statuses = [CodeStatus::Abandoned, CodeStatus::Maintenance, CodeStatus::Active];
        let enc: Vec<_> = statuses
            .iter()
            .map(|&s| encode_layer3(&ProjectManifest { code_status: s, ..base.clone() }).get("l3.code_status").unwrap())
            .collect();
        assert_eq!(enc, vec![0.0, 1.0, 2.0]);
    }
}
