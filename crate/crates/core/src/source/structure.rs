//! Token-level metrics: branches, if-nesting depth, loops and library call
//! counts.

use super::lexer::{SourceUnit, Token, TokenKind, Warning};

pub const ALLOC_FNS: &[&str] = &["malloc", "calloc", "realloc"];
pub const SAFE_LIB_FNS: &[&str] = &[
    "strncpy", "strncat", "snprintf", "vsnprintf", "fgets", "strlcpy", "strlcat",
];
pub const UNSAFE_LIB_FNS: &[&str] = &["strcpy", "strcat", "sprintf", "vsprintf", "gets", "scanf"];

const MAX_NESTING: usize = 500;

/// Identifiers that are followed by `(` without being calls.
pub(crate) const NON_CALL_WORDS: &[&str] = &[
    "if", "for", "while", "switch", "return", "sizeof", "do", "else", "case", "typeof",
    "__typeof__", "alignof", "_Alignof", "alignas", "_Alignas", "decltype", "catch", "new",
    "delete", "throw", "static_assert", "_Static_assert", "__attribute__", "__declspec",
    "defined", "noexcept", "operator", "__asm__", "asm", "_Generic", "int", "char", "void",
    "long", "short", "unsigned", "signed", "float", "double", "const", "volatile", "struct",
    "union", "enum",
];

/// Positions of identifiers in call position: an identifier immediately
/// followed by `(`.
pub fn call_sites<'a>(tokens: &'a [Token]) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    tokens.windows(2).enumerate().filter_map(|(i, w)| match (&w[0].kind, &w[1].kind) {
        (TokenKind::Ident(name), TokenKind::Punct("(")) => Some((i, name.as_str())),
        _ => None,
    })
}

fn count_calls(u: &SourceUnit, set: &[&str]) -> u64 {
    call_sites(&u.tokens).filter(|(_, n)| set.contains(n)).count() as u64
}

pub fn alloc_count(u: &SourceUnit) -> u64 {
    count_calls(u, ALLOC_FNS)
}

/// (safe, unsafe) string/buffer library calls.
pub fn lib_safety_counts(u: &SourceUnit) -> (u64, u64) {
    (count_calls(u, SAFE_LIB_FNS), count_calls(u, UNSAFE_LIB_FNS))
}

/// Lines holding at least one token. Directives and literals that span
/// several physical lines count every line they cover.
pub fn sloc(u: &SourceUnit) -> u64 {
    let mut lines = 0u64;
    let mut last = 0u32;
    for t in &u.tokens {
        let from = t.line.max(last + 1);
        if t.end_line >= from {
            lines += u64::from(t.end_line - from + 1);
            last = t.end_line;
        }
    }
    lines
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Structure {
    pub branch_count: u64,
    pub branch_max_depth: u64,
    pub loop_count: u64,
    pub warnings: Vec<Warning>,
}

/// `(branch_count, branch_max_depth)`.
pub fn branch_metrics(u: &SourceUnit) -> (u64, u64) {
    let s = analyze(u);
    (s.branch_count, s.branch_max_depth)
}

pub fn loop_count(u: &SourceUnit) -> u64 {
    analyze(u).loop_count
}

/// Branch count is `if` + `case` + `?` tokens. Depth comes from a small
/// statement walker: each `if` body (braced or not) is one level deeper,
/// `else if` stays on the level of its chain. Loop count is `for` + `while`
/// + `do` tokens minus the `while` that closes each `do`.
pub fn analyze(u: &SourceUnit) -> Structure {
    let toks = &u.tokens;
    let branch_count = toks
        .iter()
        .filter(|t| t.is_ident("if") || t.is_ident("case") || t.is_punct("?"))
        .count() as u64;

    let mut w = Walker {
        toks,
        pos: 0,
        max_depth: 0,
        frozen: false,
        do_closers: 0,
        nesting: 0,
        warnings: Vec::new(),
    };
    w.top_level();

    let loops = toks
        .iter()
        .filter(|t| t.is_ident("for") || t.is_ident("while") || t.is_ident("do"))
        .count();
    Structure {
        branch_count,
        branch_max_depth: w.max_depth as u64,
        loop_count: (loops - w.do_closers) as u64,
        warnings: w.warnings,
    }
}

struct Walker<'a> {
    toks: &'a [Token],
    pos: usize,
    max_depth: usize,
    /// Set once braces go unbalanced; depth is no longer updated.
    frozen: bool,
    do_closers: usize,
    nesting: usize,
    warnings: Vec<Warning>,
}

impl Walker<'_> {
    fn tok(&self, ahead: usize) -> Option<&Token> {
        self.toks.get(self.pos + ahead)
    }

    fn at_ident(&self, s: &str) -> bool {
        self.tok(0).is_some_and(|t| t.is_ident(s))
    }

    fn at_punct(&self, s: &str) -> bool {
        self.tok(0).is_some_and(|t| t.is_punct(s))
    }

    fn line(&self) -> u32 {
        self.tok(0)
            .or(self.toks.last())
            .map(|t| t.line)
            .unwrap_or(0)
    }

    fn warn(&mut self, message: impl Into<String>) {
        let line = self.line();
        self.warnings.push(Warning {
            line,
            message: message.into(),
        });
    }

    fn enter_if(&mut self, depth: usize) {
        if !self.frozen {
            self.max_depth = self.max_depth.max(depth);
        }
    }

    fn top_level(&mut self) {
        while self.pos < self.toks.len() {
            if self.at_punct("}") {
                if !self.frozen {
                    self.warn("unbalanced '}'; if-depth computed up to here");
                    self.frozen = true;
                }
                self.pos += 1;
                continue;
            }
            self.statement(0);
        }
    }

    fn block(&mut self, depth: usize) {
        let open_line = self.line();
        self.pos += 1;
        loop {
            match self.tok(0) {
                None => {
                    self.warnings.push(Warning {
                        line: open_line,
                        message: "unclosed '{'".into(),
                    });
                    return;
                }
                Some(t) if t.is_punct("}") => {
                    self.pos += 1;
                    return;
                }
                Some(_) => self.statement(depth),
            }
        }
    }

    /// At `(`; consumes through the matching `)`. Braces inside (lambdas,
    /// statement expressions) are walked as blocks.
    fn parens(&mut self, depth: usize) {
        let mut level = 0usize;
        while let Some(t) = self.tok(0) {
            if t.is_punct("(") {
                level += 1;
                self.pos += 1;
            } else if t.is_punct(")") {
                self.pos += 1;
                level -= 1;
                if level == 0 {
                    return;
                }
            } else if t.is_punct("{") {
                self.block(depth);
            } else if t.is_punct("}") {
                self.warn("unbalanced '('");
                return;
            } else {
                self.pos += 1;
            }
        }
        self.warn("unbalanced '('");
    }

    fn condition(&mut self, depth: usize) {
        if self.at_punct("(") {
            self.parens(depth);
        }
    }

    fn statement(&mut self, depth: usize) {
        if self.nesting >= MAX_NESTING {
            self.warn("nesting too deep; remaining tokens skipped");
            self.pos = self.toks.len();
            return;
        }
        self.nesting += 1;
        self.statement_inner(depth);
        self.nesting -= 1;
    }

    fn statement_inner(&mut self, depth: usize) {
        let Some(t) = self.tok(0) else { return };
        match &t.kind {
            TokenKind::Directive(_) => self.pos += 1,
            TokenKind::Punct("{") => self.block(depth),
            TokenKind::Punct("}") => {}
            TokenKind::Punct(";") => self.pos += 1,
            TokenKind::Ident(w) => match w.as_str() {
                "if" => {
                    self.pos += 1;
                    if self.at_ident("constexpr") {
                        self.pos += 1;
                    }
                    self.condition(depth);
                    let inner = depth + 1;
                    self.enter_if(inner);
                    self.statement(inner);
                    if self.at_ident("else") {
                        self.pos += 1;
                        if self.at_ident("if") {
                            self.statement(depth);
                        } else {
                            self.statement(inner);
                        }
                    }
                }
                "else" => {
                    self.pos += 1;
                    self.statement(depth);
                }
                "for" | "while" | "switch" | "catch" => {
                    self.pos += 1;
                    self.condition(depth);
                    self.statement(depth);
                }
                "do" => {
                    self.pos += 1;
                    self.statement(depth);
                    if self.at_ident("while") {
                        self.do_closers += 1;
                        self.pos += 1;
                        self.condition(depth);
                        if self.at_punct(";") {
                            self.pos += 1;
                        }
                    } else {
                        self.warn("'do' without closing 'while'");
                    }
                }
                "try" => {
                    self.pos += 1;
                    self.statement(depth);
                }
                "case" => {
                    while let Some(t) = self.tok(0) {
                        if t.is_punct(";") || t.is_punct("{") || t.is_punct("}") {
                            break;
                        }
                        let colon = t.is_punct(":");
                        self.pos += 1;
                        if colon {
                            break;
                        }
                    }
                }
                "default" if self.tok(1).is_some_and(|n| n.is_punct(":")) => self.pos += 2,
                _ if self.tok(1).is_some_and(|n| n.is_punct(":")) => self.pos += 2,
                _ => self.simple(depth),
            },
            _ => self.simple(depth),
        }
    }

    /// Expression or declaration up to `;`. A braced region is walked as a
    /// block; one directly after `)` or `const`-like qualifiers (a function
    /// body) ends the statement.
    fn simple(&mut self, depth: usize) {
        let start = self.pos;
        while let Some(t) = self.tok(0) {
            match &t.kind {
                TokenKind::Punct(";") => {
                    self.pos += 1;
                    return;
                }
                TokenKind::Punct("}") => return,
                TokenKind::Punct("(") => self.parens(depth),
                TokenKind::Punct("{") => {
                    let body = self.pos > start && self.toks[self.pos - 1].is_punct(")");
                    self.block(depth);
                    if body {
                        return;
                    }
                }
                TokenKind::Directive(_) if self.pos > start => return,
                TokenKind::Ident(w)
                    if self.pos > start
                        && matches!(
                            w.as_str(),
                            "if" | "for" | "while" | "do" | "switch" | "else" | "case" | "try"
                        ) =>
                {
                    return
                }
                _ => self.pos += 1,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::lexer::tokenize;
    use super::*;

    fn bm(src: &str) -> (u64, u64) {
        branch_metrics(&tokenize(src))
    }

    #[test]
    fn branch_examples() {
        assert_eq!(bm("if(a){if(b){x=1;}}"), (2, 2));
        assert_eq!(bm("int main(void) { return 0; }"), (0, 0));
    }

    #[test]
    fn braceless_if_counts_one_level() {
        assert_eq!(bm("void f(){ if (a) if (b) x(); else y(); }"), (2, 2));
        assert_eq!(bm("void f(){ if (a) x(); if (b) y(); }"), (2, 1));
    }

    #[test]
    fn else_if_chain_stays_on_one_level() {
        assert_eq!(
            bm("void f(){ if (a) {} else if (b) {} else if (c) {} else { if (d) {} } }"),
            (4, 2)
        );
    }

    #[test]
    fn case_and_ternary_count_as_branches() {
        let src = "int g(int k){ switch(k){ case 1: return k ? 2 : 3; case 2: if (k) return 1; default: return 0; } }";
        assert_eq!(bm(src), (4, 1));
    }

    #[test]
    fn functions_inside_structs_and_namespaces() {
        let src = "namespace n { struct S { int m() { if (a) { if (b) return 1; } return 0; } }; }";
        assert_eq!(bm(src), (2, 2));
    }

    #[test]
    fn stray_close_brace_freezes_depth() {
        let u = tokenize("void f(){ if(a){} } } void g(){ if(a){ if(b){ if(c){} } } }");
        let s = analyze(&u);
        assert_eq!(s.branch_count, 4);
        assert_eq!(s.branch_max_depth, 1);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn unclosed_brace_is_tolerated() {
        let u = tokenize("void f(){ if(a){ if(b){ x();");
        let s = analyze(&u);
        assert_eq!(s.branch_max_depth, 2);
        assert!(!s.warnings.is_empty());
    }

    #[test]
    fn loops() {
        assert_eq!(loop_count(&tokenize("void f(){ for(;;){} while(x){} }")), 2);
        assert_eq!(loop_count(&tokenize("void f(){ do { } while(x); }")), 1);
        assert_eq!(loop_count(&tokenize("void f(){ do x++; while(x < 3); }")), 1);
        assert_eq!(loop_count(&tokenize("int f(){ return 1; }")), 0);
        assert_eq!(
            loop_count(&tokenize("void f(){ do { while(a) {} } while(b); do do y(); while(c); while(d); }")),
            4
        );
    }

    #[test]
    fn unmatched_do_counts_and_warns() {
        let s = analyze(&tokenize("void f(){ do { x(); } }"));
        assert_eq!(s.loop_count, 1);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn allocation_calls() {
        assert_eq!(alloc_count(&tokenize("p = malloc(n); q = calloc(1,n);")), 2);
        assert_eq!(alloc_count(&tokenize("int mallocs;")), 0);
        assert_eq!(alloc_count(&tokenize("realloc(p, n)")), 1);
        assert_eq!(alloc_count(&tokenize("size_t malloc_size = 0; /* malloc(1) */")), 0);
    }

    #[test]
    fn library_safety() {
        assert_eq!(lib_safety_counts(&tokenize("strcpy(a,b); snprintf(c,n,\"%s\",d);")), (1, 1));
        assert_eq!(lib_safety_counts(&tokenize("x = y + 1;")), (0, 0));
        assert_eq!(lib_safety_counts(&tokenize("gets(buf)")), (0, 1));
        assert_eq!(lib_safety_counts(&tokenize("scanf(\"%s\", b); fgets(b, n, f);")), (1, 1));
    }

    #[test]
    fn sloc_counts_token_lines() {
        let src = "int a;\n// one\n\nint b;\n/* two */\nint c;\n";
        assert_eq!(sloc(&tokenize(src)), 3);
        assert_eq!(sloc(&tokenize("")), 0);
        assert_eq!(sloc(&tokenize("#define X \\\n 1\nint a; int b;\n")), 3);
    }

    #[test]
    fn deep_nesting_does_not_overflow() {
        let src = format!("void f(){}{}", "{".repeat(10_000), "}".repeat(10_000));
        let s = analyze(&tokenize(&src));
        assert!(!s.warnings.is_empty());
    }
}
