//! Layer-2 features computed from raw C/C++ source, without preprocessing.

pub mod callgraph;
pub mod lexer;
pub mod structure;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;
use walkdir::WalkDir;

pub use callgraph::{build_call_graph, recursive_count, CallGraph};
pub use lexer::{tokenize, tokenize_path, SourceUnit, Token, TokenKind, Warning};
pub use structure::{alloc_count, branch_metrics, lib_safety_counts, loop_count, sloc};

use crate::corpus::FeatureVector;
use crate::manifest::ProjectManifest;

pub const SOURCE_EXTENSIONS: &[&str] = &["c", "h", "cc", "cpp", "hpp"];

/// Parsed-code metrics for one file or a whole tree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SourceMetrics {
    pub safe_lib_calls: u64,
    pub branch_count: u64,
    pub branch_max_depth: u64,
    pub loop_count: u64,
    pub alloc_calls: u64,
    pub sloc: u64,
    pub recursive_fns: u64,
    pub unsafe_lib_calls: u64,
}

impl SourceMetrics {
    pub fn of_unit(u: &SourceUnit) -> (SourceMetrics, Vec<Warning>) {
        let s = structure::analyze(u);
        let (safe, unsafe_) = lib_safety_counts(u);
        let m = SourceMetrics {
            safe_lib_calls: safe,
            branch_count: s.branch_count,
            branch_max_depth: s.branch_max_depth,
            loop_count: s.loop_count,
            alloc_calls: alloc_count(u),
            sloc: sloc(u),
            recursive_fns: recursive_count(&build_call_graph([u])),
            unsafe_lib_calls: unsafe_,
        };
        let mut warnings = u.warnings.clone();
        warnings.extend(s.warnings);
        warnings.sort_by_key(|w| w.line);
        (m, warnings)
    }

    /// Sums counts and takes the max depth. `recursive_fns` is summed too;
    /// callers that know the joint call graph overwrite it.
    pub fn accumulate(&mut self, other: &SourceMetrics) {
        self.safe_lib_calls += other.safe_lib_calls;
        self.branch_count += other.branch_count;
        self.branch_max_depth = self.branch_max_depth.max(other.branch_max_depth);
        self.loop_count += other.loop_count;
        self.alloc_calls += other.alloc_calls;
        self.sloc += other.sloc;
        self.recursive_fns += other.recursive_fns;
        self.unsafe_lib_calls += other.unsafe_lib_calls;
    }

    pub fn entries(&self) -> [(&'static str, u64); 8] {
        [
            ("l2.safe_lib_calls", self.safe_lib_calls),
            ("l2.branch_count", self.branch_count),
            ("l2.branch_max_depth", self.branch_max_depth),
            ("l2.loop_count", self.loop_count),
            ("l2.alloc_calls", self.alloc_calls),
            ("l2.sloc", self.sloc),
            ("l2.recursive_fns", self.recursive_fns),
            ("l2.unsafe_lib_calls", self.unsafe_lib_calls),
        ]
    }

    pub fn to_features(&self) -> FeatureVector {
        self.entries().into_iter().map(|(k, v)| (k, v as f64)).collect()
    }
}

impl Serialize for SourceMetrics {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<&str, u64> = self.entries().into_iter().collect();
        map.serialize(s)
    }
}

/// Per-file record of the `--emit per-file` dump.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileMetrics {
    pub path: String,
    pub metrics: SourceMetrics,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer2Extraction {
    pub features: FeatureVector,
    pub totals: SourceMetrics,
    pub files: Vec<FileMetrics>,
}

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0} is not a directory")]
    NotADirectory(String),
    #[error("no project manifest given; l2.is_server cannot be determined")]
    MissingManifest,
}

fn is_source_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| SOURCE_EXTENSIONS.contains(&e))
}

/// Tokenizes every C/C++ file under `dir` in sorted path order. Paths are
/// relative to `dir` with `/` separators.
pub fn read_tree(dir: &Path) -> Result<Vec<SourceUnit>, SourceError> {
    if !dir.is_dir() {
        return Err(SourceError::NotADirectory(dir.display().to_string()));
    }
    let mut units = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| SourceError::Io {
            path: e.path().map(|p| p.display().to_string()).unwrap_or_default(),
            message: e.to_string(),
        })?;
        if !entry.file_type().is_file() || !is_source_file(entry.path()) {
            continue;
        }
        let bytes = std::fs::read(entry.path()).map_err(|e| SourceError::Io {
            path: entry.path().display().to_string(),
            message: e.to_string(),
        })?;
        let rel = entry.path().strip_prefix(dir).unwrap_or(entry.path());
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        units.push(tokenize_path(&rel, &String::from_utf8_lossy(&bytes)));
    }
    Ok(units)
}

/// Metrics over a set of units. Counts add up across files, depth is the
/// max, and recursion is measured on the joint call graph so that cycles
/// spanning files are found.
pub fn measure_units(units: &[SourceUnit]) -> (SourceMetrics, Vec<FileMetrics>) {
    let mut totals = SourceMetrics::default();
    let files: Vec<FileMetrics> = units
        .iter()
        .map(|u| {
            let (metrics, warnings) = SourceMetrics::of_unit(u);
            totals.accumulate(&metrics);
            FileMetrics {
                path: u.path.clone(),
                metrics,
                warnings,
            }
        })
        .collect();
    totals.recursive_fns = recursive_count(&build_call_graph(units));
    (totals, files)
}

/// Source metrics for a tree without the manifest-derived `l2.is_server`.
pub fn measure_tree(dir: &Path) -> Result<(SourceMetrics, Vec<FileMetrics>), SourceError> {
    Ok(measure_units(&read_tree(dir)?))
}

/// All nine layer-2 features. `l2.is_server` comes from the manifest.
pub fn extract_layer2(
    dir: &Path,
    manifest: Option<&ProjectManifest>,
) -> Result<Layer2Extraction, SourceError> {
    let manifest = manifest.ok_or(SourceError::MissingManifest)?;
    let (totals, files) = measure_tree(dir)?;
    let mut features = totals.to_features();
    features.set("l2.is_server", if manifest.is_server_app { 1.0 } else { 0.0 });
    Ok(Layer2Extraction {
        features,
        totals,
        files,
    })
}
