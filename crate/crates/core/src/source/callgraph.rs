//! Function-level call graph and recursion detection.
//!
//! A definition is `name ( ... ) [qualifiers] {` at brace depth 0, where
//! braces opened by `namespace` and `extern "C"` do not count. Calls are
//! identifiers in call position inside a body; member and function-pointer
//! calls (`a.f()`, `p->f()`, `(*fp)()`) are not resolved.

use std::collections::{BTreeMap, BTreeSet};

use petgraph::algo::tarjan_scc;
use petgraph::graphmap::DiGraphMap;
use serde::Serialize;

use super::lexer::{SourceUnit, Token, TokenKind};
use super::structure::NON_CALL_WORDS;

const QUALIFIERS: &[&str] = &["const", "noexcept", "override", "final", "volatile", "throw"];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CallGraph {
    pub defined: BTreeSet<String>,
    /// (caller, callee); callees may be external.
    pub edges: BTreeSet<(String, String)>,
}

fn matching(tokens: &[Token], open: usize, l: &str, r: &str) -> Option<usize> {
    let mut level = 0usize;
    for (i, t) in tokens.iter().enumerate().skip(open) {
        if t.is_punct(l) {
            level += 1;
        } else if t.is_punct(r) {
            level = level.checked_sub(1)?;
            if level == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Whether the `{` at `i` opens a namespace or linkage block.
fn transparent_brace(tokens: &[Token], i: usize) -> bool {
    let mut j = i;
    while j > 0 {
        j -= 1;
        let t = &tokens[j];
        if t.is_ident("namespace") {
            return true;
        }
        if t.kind == TokenKind::Literal {
            return j > 0 && tokens[j - 1].is_ident("extern");
        }
        if !(t.is_punct("::") || t.ident().is_some()) {
            return false;
        }
    }
    false
}

/// `(name, body_open, body_close)` for each definition at depth 0.
fn definitions(tokens: &[Token]) -> Vec<(String, usize, usize)> {
    let mut defs = Vec::new();
    let mut stack: Vec<bool> = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if t.is_punct("{") {
            stack.push(transparent_brace(tokens, i));
            i += 1;
            continue;
        }
        if t.is_punct("}") {
            stack.pop();
            i += 1;
            continue;
        }
        let depth = stack.iter().filter(|&&transparent| !transparent).count();
        if depth == 0 {
            if let Some(name) = t.ident() {
                let callable = !NON_CALL_WORDS.contains(&name)
                    && tokens.get(i + 1).is_some_and(|n| n.is_punct("("));
                if callable {
                    if let Some(close) = matching(tokens, i + 1, "(", ")") {
                        let mut k = close + 1;
                        while tokens
                            .get(k)
                            .and_then(Token::ident)
                            .is_some_and(|q| QUALIFIERS.contains(&q))
                        {
                            k += 1;
                        }
                        if tokens.get(k).is_some_and(|b| b.is_punct("{")) {
                            let end = matching(tokens, k, "{", "}").unwrap_or(tokens.len());
                            defs.push((name.to_string(), k, end));
                            i = end + 1;
                            continue;
                        }
                        i = close + 1;
                        continue;
                    }
                }
            }
        }
        i += 1;
    }
    defs
}

fn callees(tokens: &[Token], open: usize, close: usize) -> impl Iterator<Item = &str> {
    (open + 1..close.min(tokens.len())).filter_map(move |i| {
        let name = tokens[i].ident()?;
        let call = tokens.get(i + 1).is_some_and(|n| n.is_punct("("));
        let member = i > 0 && tokens[i - 1].is_punct(".")
            || i > 1 && tokens[i - 1].is_punct(">") && tokens[i - 2].is_punct("-");
        (call && !member && !NON_CALL_WORDS.contains(&name)).then_some(name)
    })
}

pub fn build_call_graph<'a>(units: impl IntoIterator<Item = &'a SourceUnit>) -> CallGraph {
    let mut g = CallGraph::default();
    for u in units {
        for (name, open, close) in definitions(&u.tokens) {
            for callee in callees(&u.tokens, open, close) {
                g.edges.insert((name.clone(), callee.to_string()));
            }
            g.defined.insert(name);
        }
    }
    g
}

/// Number of defined functions on a call cycle. A single function counts
/// only when it calls itself.
pub fn recursive_count(g: &CallGraph) -> u64 {
    recursive_functions(g).len() as u64
}

pub fn recursive_functions(g: &CallGraph) -> BTreeSet<String> {
    let ids: BTreeMap<&str, u32> = g
        .defined
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i as u32))
        .collect();
    let mut graph = DiGraphMap::<u32, ()>::new();
    for &id in ids.values() {
        graph.add_node(id);
    }
    for (a, b) in &g.edges {
        if let (Some(&x), Some(&y)) = (ids.get(a.as_str()), ids.get(b.as_str())) {
            graph.add_edge(x, y, ());
        }
    }
    let names: Vec<&str> = ids.keys().copied().collect();
    let mut out = BTreeSet::new();
    for scc in tarjan_scc(&graph) {
        let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
        if cyclic {
            out.extend(scc.iter().map(|&id| names[id as usize].to_string()));
        }
    }
    out
}
