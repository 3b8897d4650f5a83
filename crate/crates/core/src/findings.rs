//! Static-analyzer reports (cppcheck XML, splint text) normalized into
//! findings and aggregated into the six layer-1 counts.
//!
//! The analyzers are never executed; only their saved output is read.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::FeatureVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    BufferWrite,
    NullDeref,
    UseAfterFree,
    MemoryLeak,
    StackReturn,
    UseBeforeDef,
    Other,
}

impl Category {
    pub const LAYER1: [Category; 6] = [
        Category::BufferWrite,
        Category::NullDeref,
        Category::UseAfterFree,
        Category::MemoryLeak,
        Category::StackReturn,
        Category::UseBeforeDef,
    ];

    /// Layer-1 feature fed by this category; `None` for `Other`.
    pub fn feature_name(self) -> Option<&'static str> {
        Some(match self {
            Category::BufferWrite => "l1.buffer_write",
            Category::NullDeref => "l1.null_deref",
            Category::UseAfterFree => "l1.use_after_free",
            Category::MemoryLeak => "l1.memory_leak",
            Category::StackReturn => "l1.stack_return",
            Category::UseBeforeDef => "l1.use_before_def",
            Category::Other => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub category: Category,
    pub file: String,
    pub line: u32,
    pub tool: String,
    pub raw_message: String,
}

/// An XML element that could not become a finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ElementError {
    /// Zero-based position among `<error>` elements.
    pub element: usize,
    pub text_line: u32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct FindingsReport {
    pub tool: String,
    pub findings: Vec<Finding>,
    pub element_errors: Vec<ElementError>,
    /// Lines of text output that matched no diagnostic pattern.
    pub unmatched_lines: usize,
}

impl FindingsReport {
    pub fn layer1_findings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.category != Category::Other)
    }
}

#[derive(Debug, Error)]
pub enum FindingsError {
    #[error("malformed XML at {line}:{column}: {message}")]
    Xml { line: u32, column: u32, message: String },
    #[error("invalid mapping table: {0}")]
    Table(String),
}

/// cppcheck error id to category. Unlisted ids map to `Other`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CppcheckMap(BTreeMap<String, Category>);

impl CppcheckMap {
    pub fn from_json(text: &str) -> Result<Self, FindingsError> {
        serde_json::from_str(text).map_err(|e| FindingsError::Table(e.to_string()))
    }

    pub fn category(&self, id: &str) -> Category {
        self.0.get(id).copied().unwrap_or(Category::Other)
    }
}

impl Default for CppcheckMap {
    fn default() -> Self {
        Self::from_json(include_str!("../data/cppcheck_map.v1.json")).expect("bundled table parses")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplintRule {
    pub all_of: Vec<String>,
    pub category: Category,
}

/// Ordered keyword rules for splint messages; first match wins and matching
/// is case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SplintRules(Vec<SplintRule>);

impl SplintRules {
    pub fn from_json(text: &str) -> Result<Self, FindingsError> {
        let mut rules: Vec<SplintRule> =
            serde_json::from_str(text).map_err(|e| FindingsError::Table(e.to_string()))?;
        for r in &mut rules {
            if r.all_of.is_empty() {
                return Err(FindingsError::Table("rule with empty all_of".into()));
            }
            for k in &mut r.all_of {
                *k = k.to_lowercase();
            }
        }
        Ok(SplintRules(rules))
    }

    pub fn classify(&self, message: &str) -> Category {
        let lower = message.to_lowercase();
        self.0
            .iter()
            .find(|r| r.all_of.iter().all(|k| lower.contains(k.as_str())))
            .map(|r| r.category)
            .unwrap_or(Category::Other)
    }
}

impl Default for SplintRules {
    fn default() -> Self {
        Self::from_json(include_str!("../data/splint_rules.v1.json")).expect("bundled table parses")
    }
}

pub fn parse_cppcheck_xml(text: &str) -> Result<FindingsReport, FindingsError> {
    parse_cppcheck_xml_with(text, &CppcheckMap::default())
}

/// Accepts both the flat `<results><error file= line= .../>` layout and the
/// version-2 layout where the position lives in a `<location>` child.
pub fn parse_cppcheck_xml_with(text: &str, map: &CppcheckMap) -> Result<FindingsReport, FindingsError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        FindingsError::Xml {
            line: pos.row,
            column: pos.col,
            message: e.to_string(),
        }
    })?;

    let mut report = FindingsReport {
        tool: "cppcheck".into(),
        ..Default::default()
    };
    let errors = doc
        .descendants()
        .filter(|n| n.is_element() && n.has_tag_name("error"));
    for (element, node) in errors.enumerate() {
        let text_line = doc.text_pos_at(node.range().start).row;
        let location = node
            .children()
            .find(|c| c.is_element() && c.has_tag_name("location"));
        let attr = |name: &str| {
            node.attribute(name)
                .or_else(|| location.and_then(|l| l.attribute(name)))
        };
        let mut fail = |reason: String| {
            report.element_errors.push(ElementError {
                element,
                text_line,
                reason,
            })
        };

        let Some(id) = node.attribute("id") else {
            fail("missing attribute `id`".into());
            continue;
        };
        let Some(file) = attr("file") else {
            fail("missing attribute `file`".into());
            continue;
        };
        let Some(line) = attr("line") else {
            fail("missing attribute `line`".into());
            continue;
        };
        let line = match line.trim().parse::<u32>() {
            Ok(l) if l >= 1 => l,
            _ => {
                fail(format!("line `{line}` is not a positive integer"));
                continue;
            }
        };
        let msg = node
            .attribute("msg")
            .or_else(|| node.attribute("verbose"))
            .unwrap_or_default();
        report.findings.push(Finding {
            category: map.category(id),
            file: file.to_string(),
            line,
            tool: report.tool.clone(),
            raw_message: msg.to_string(),
        });
    }
    Ok(report)
}

pub fn parse_splint_text(text: &str) -> FindingsReport {
    parse_splint_text_with(text, &SplintRules::default())
}

/// Splits `file:LINE:COL: message` (column optional) into its parts.
fn splint_header(line: &str) -> Option<(&str, u32, &str)> {
    let bytes = line.as_bytes();
    for (i, _) in line.match_indices(':') {
        if i == 0 {
            continue;
        }
        let digits = bytes[i + 1..].iter().take_while(|b| b.is_ascii_digit()).count();
        if digits == 0 || bytes.get(i + 1 + digits) != Some(&b':') {
            continue;
        }
        let line_no = line[i + 1..i + 1 + digits].parse().ok()?;
        let mut rest = &line[i + 2 + digits..];
        let col = rest.bytes().take_while(|b| b.is_ascii_digit()).count();
        if col > 0 && rest.as_bytes().get(col) == Some(&b':') {
            rest = &rest[col + 1..];
        }
        if !rest.starts_with(' ') && !rest.is_empty() {
            continue;
        }
        return Some((&line[..i], line_no, rest.trim()));
    }
    None
}

pub fn parse_splint_text_with(text: &str, rules: &SplintRules) -> FindingsReport {
    struct Pending {
        file: String,
        line: u32,
        header: String,
        body: String,
    }

    let mut report = FindingsReport {
        tool: "splint".into(),
        ..Default::default()
    };
    let mut pending: Option<Pending> = None;

    let flush = |p: Pending, report: &mut FindingsReport| {
        let mut category = rules.classify(&p.header);
        if category == Category::Other && !p.body.is_empty() {
            category = rules.classify(&p.body);
        }
        let raw_message = if p.body.is_empty() {
            p.header
        } else {
            format!("{}\n{}", p.header, p.body)
        };
        report.findings.push(Finding {
            category,
            file: p.file,
            line: p.line,
            tool: "splint".into(),
            raw_message,
        });
    };

    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        if line.starts_with([' ', '\t']) {
            match pending.as_mut() {
                Some(p) => {
                    if !p.body.is_empty() {
                        p.body.push('\n');
                    }
                    p.body.push_str(line.trim());
                }
                None => report.unmatched_lines += 1,
            }
            continue;
        }
        if let Some(p) = pending.take() {
            flush(p, &mut report);
        }
        match splint_header(line) {
            Some((file, line_no, msg)) if line_no >= 1 => {
                pending = Some(Pending {
                    file: file.to_string(),
                    line: line_no,
                    header: msg.to_string(),
                    body: String::new(),
                });
            }
            _ => report.unmatched_lines += 1,
        }
    }
    if let Some(p) = pending.take() {
        flush(p, &mut report);
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    CppcheckXml,
    SplintText,
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::CppcheckXml => "cppcheck-xml",
            ReportFormat::SplintText => "splint-text",
        })
    }
}

/// XML documents start with `<`; anything else is treated as splint output.
pub fn detect_format(text: &str) -> ReportFormat {
    if text.trim_start_matches('\u{feff}').trim_start().starts_with('<') {
        ReportFormat::CppcheckXml
    } else {
        ReportFormat::SplintText
    }
}

pub fn parse_report(text: &str) -> Result<FindingsReport, FindingsError> {
    match detect_format(text) {
        ReportFormat::CppcheckXml => parse_cppcheck_xml(text),
        ReportFormat::SplintText => Ok(parse_splint_text(text)),
    }
}

/// Counts findings per layer-1 category over all reports. A (tool,
/// category, file, line) key counts once, so re-running the same tool does
/// not inflate the counts while two tools agreeing counts twice.
pub fn aggregate_layer1(reports: &[FindingsReport]) -> FeatureVector {
    let keys: BTreeSet<(&str, Category, &str, u32)> = reports
        .iter()
        .flat_map(|r| r.layer1_findings())
        .map(|f| (f.tool.as_str(), f.category, f.file.as_str(), f.line))
        .collect();
    let mut counts: BTreeMap<Category, usize> = BTreeMap::new();
    for (_, cat, _, _) in &keys {
        *counts.entry(*cat).or_default() += 1;
    }
    Category::LAYER1
        .iter()
        .map(|c| {
            (
                c.feature_name().unwrap(),
                counts.get(c).copied().unwrap_or(0) as f64,
            )
        })
        .collect()
}
