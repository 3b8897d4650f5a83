#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use vulnscore::source::{measure_units, tokenize_path, SourceMetrics, SourceUnit};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap()
}

/// The three source files of the miniature project, path and text.
pub fn miniproj_sources() -> Vec<(String, String)> {
    ["include/buf.h", "src/buf.c", "src/netd.c"]
        .iter()
        .map(|p| (p.to_string(), read(&format!("miniproj/{p}"))))
        .collect()
}

pub fn metrics_of(files: &[(String, String)]) -> (SourceMetrics, Vec<SourceMetrics>) {
    let units: Vec<SourceUnit> = files.iter().map(|(p, s)| tokenize_path(p, s)).collect();
    let (totals, per_file) = measure_units(&units);
    (totals, per_file.into_iter().map(|f| f.metrics).collect())
}

/// Hand-counted metrics of the miniature project, per file in path order.
pub fn golden_files() -> Vec<SourceMetrics> {
    vec![
        // include/buf.h
        SourceMetrics { sloc: 12, ..Default::default() },
        // src/buf.c
        SourceMetrics {
            branch_count: 5,
            branch_max_depth: 1,
            loop_count: 2,
            alloc_calls: 3,
            sloc: 40,
            recursive_fns: 3,
            ..Default::default()
        },
        // src/netd.c
        SourceMetrics {
            safe_lib_calls: 1,
            branch_count: 8,
            branch_max_depth: 2,
            loop_count: 1,
            sloc: 44,
            unsafe_lib_calls: 2,
            ..Default::default()
        },
    ]
}

pub fn golden_totals() -> SourceMetrics {
    SourceMetrics {
        safe_lib_calls: 1,
        branch_count: 13,
        branch_max_depth: 2,
        loop_count: 3,
        alloc_calls: 3,
        sloc: 96,
        recursive_fns: 3,
        unsafe_lib_calls: 2,
    }
}

/// Layout-only edits: comments appended to every line, indentation
/// swapped for tabs, trailing blanks and blank lines inserted.
pub fn mutate_layout(src: &str) -> String {
    let mut out = String::new();
    for (i, line) in src.lines().enumerate() {
        let body = line.strip_prefix("    ").map_or(line.to_string(), |r| format!("\t{r}"));
        out.push_str(&body);
        if !line.trim_end().ends_with('\\') {
            out.push_str("  // if (x) { while (y) malloc(1); } ? : case");
        }
        out.push('\n');
        if i % 3 == 0 {
            out.push_str("   \t \n");
        }
    }
    out
}

/// Rewrites the contents of string and character literals.
pub fn mutate_literals(src: &str) -> String {
    src.replace("\"bad request\\n\"", "\"if (x) { while (1) strcpy(a, b); } /* not a comment */\"")
        .replace("\"%d\"", "\"%s for (;;) ? :\"")
        .replace("\"x\"", "\"}}}{\"")
        .replace("'#'", "'{'")
        .replace("'\\0'", "'('")
}
