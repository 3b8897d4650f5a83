//! A forgiving C/C++ tokenizer. Comments vanish, string and character
//! literals collapse to a content-free `Literal` token, and each
//! preprocessor line becomes one `Directive` token.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Number,
    Literal,
    Punct(&'static str),
    /// Preprocessor line with comments removed.
    Directive(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: u32,
    /// Last physical line covered; differs from `line` for continued
    /// directives and multi-line literals.
    pub end_line: u32,
}

impl Token {
    pub fn is_ident(&self, s: &str) -> bool {
        matches!(&self.kind, TokenKind::Ident(i) if i == s)
    }

    pub fn is_punct(&self, s: &str) -> bool {
        matches!(self.kind, TokenKind::Punct(p) if p == s)
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.kind {
            TokenKind::Ident(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub line: u32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceUnit {
    pub path: String,
    pub tokens: Vec<Token>,
    pub warnings: Vec<Warning>,
}

const PUNCT: &[&str] = &[
    "(", ")", "{", "}", "[", "]", ";", ",", "?", ":", ".", "+", "-", "*", "/", "%", "&", "|",
    "^", "~", "!", "=", "<", ">", "#", "\\", "@", "$", "`",
];

fn punct(c: u8) -> &'static str {
    PUNCT
        .iter()
        .find(|p| p.as_bytes()[0] == c)
        .copied()
        .unwrap_or("?unknown")
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_' || c >= 0x80
}

fn is_ident_char(c: u8) -> bool {
    is_ident_start(c) || c.is_ascii_digit()
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    /// True until the first token of the current physical line.
    line_start: bool,
    out: SourceUnit,
}

impl<'a> Lexer<'a> {
    fn peek(&self, ahead: usize) -> Option<u8> {
        self.src.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek(0)?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn warn(&mut self, line: u32, message: impl Into<String>) {
        self.out.warnings.push(Warning {
            line,
            message: message.into(),
        });
    }

    fn push(&mut self, kind: TokenKind, line: u32) {
        self.out.tokens.push(Token {
            kind,
            line,
            end_line: self.line,
        });
        self.line_start = false;
    }

    /// At `/*`; consumes through `*/`.
    fn block_comment(&mut self) {
        let start = self.line;
        self.pos += 2;
        loop {
            match self.peek(0) {
                None => {
                    self.warn(start, "unterminated block comment");
                    return;
                }
                Some(b'*') if self.peek(1) == Some(b'/') => {
                    self.pos += 2;
                    return;
                }
                Some(_) => {
                    self.bump();
                }
            }
        }
    }

    fn line_comment(&mut self) {
        // a backslash-newline continues a line comment
        while let Some(c) = self.peek(0) {
            if c == b'\n' {
                return;
            }
            if c == b'\\' && self.peek(1) == Some(b'\n') {
                self.bump();
            }
            self.bump();
        }
    }

    /// At the opening quote; consumes through the closing one.
    fn quoted(&mut self, quote: u8) {
        let start = self.line;
        self.pos += 1;
        loop {
            match self.peek(0) {
                None => {
                    self.warn(start, "unterminated literal");
                    return;
                }
                Some(b'\\') => {
                    self.bump();
                    self.bump();
                }
                Some(b'\n') => {
                    // unescaped newline: the literal was never closed
                    self.warn(start, "unterminated literal");
                    return;
                }
                Some(c) => {
                    self.pos += 1;
                    if c == quote {
                        return;
                    }
                }
            }
        }
    }

    /// At `"` of `R"delim(...)delim"`.
    fn raw_string(&mut self) {
        let start = self.line;
        self.pos += 1;
        let delim_start = self.pos;
        while let Some(c) = self.peek(0) {
            if c == b'(' || c == b'\n' || c == b'"' {
                break;
            }
            self.pos += 1;
        }
        if self.peek(0) != Some(b'(') {
            self.warn(start, "malformed raw string");
            return;
        }
        let mut close = Vec::with_capacity(self.pos - delim_start + 2);
        close.push(b')');
        close.extend_from_slice(&self.src[delim_start..self.pos]);
        close.push(b'"');
        self.pos += 1;
        loop {
            if self.src[self.pos..].starts_with(&close) {
                self.pos += close.len();
                return;
            }
            if self.bump().is_none() {
                self.warn(start, "unterminated raw string");
                return;
            }
        }
    }

    fn directive(&mut self) {
        let start = self.line;
        let mut text = String::new();
        loop {
            match self.peek(0) {
                None | Some(b'\n') => break,
                Some(b'\\') if self.peek(1) == Some(b'\n') => {
                    self.pos += 1;
                    self.bump();
                    text.push(' ');
                }
                Some(b'\\') if self.peek(1) == Some(b'\r') && self.peek(2) == Some(b'\n') => {
                    self.pos += 2;
                    self.bump();
                    text.push(' ');
                }
                Some(b'/') if self.peek(1) == Some(b'/') => {
                    self.line_comment();
                    break;
                }
                Some(b'/') if self.peek(1) == Some(b'*') => {
                    self.block_comment();
                    text.push(' ');
                }
                Some(c @ (b'"' | b'\'')) => {
                    let from = self.pos;
                    self.quoted(c);
                    text.push_str(&String::from_utf8_lossy(&self.src[from..self.pos]));
                }
                Some(_) => {
                    let from = self.pos;
                    self.pos += 1;
                    text.push_str(&String::from_utf8_lossy(&self.src[from..self.pos]));
                }
            }
        }
        let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
        self.push(TokenKind::Directive(text), start);
    }

    fn number(&mut self) {
        let start = self.line;
        while let Some(c) = self.peek(0) {
            let prev = self.src[self.pos - 1];
            let exp_sign = (c == b'+' || c == b'-') && matches!(prev, b'e' | b'E' | b'p' | b'P');
            let separator = c == b'\'' && prev.is_ascii_hexdigit()
                && self.peek(1).is_some_and(|n| n.is_ascii_hexdigit());
            if is_ident_char(c) || c == b'.' || exp_sign || separator {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.push(TokenKind::Number, start);
    }

    fn run(mut self) -> SourceUnit {
        while let Some(c) = self.peek(0) {
            match c {
                b'\n' => {
                    self.bump();
                    self.line_start = true;
                }
                b' ' | b'\t' | b'\r' | b'\x0b' | b'\x0c' => self.pos += 1,
                b'\\' if self.peek(1) == Some(b'\n') => {
                    self.pos += 1;
                    self.bump();
                }
                b'/' if self.peek(1) == Some(b'/') => self.line_comment(),
                b'/' if self.peek(1) == Some(b'*') => self.block_comment(),
                b'#' if self.line_start => self.directive(),
                b'"' | b'\'' => {
                    let start = self.line;
                    self.quoted(c);
                    self.push(TokenKind::Literal, start);
                }
                b'0'..=b'9' => {
                    self.pos += 1;
                    self.number();
                }
                b'.' if self.peek(1).is_some_and(|d| d.is_ascii_digit()) => {
                    self.pos += 1;
                    self.number();
                }
                b':' if self.peek(1) == Some(b':') => {
                    let line = self.line;
                    self.pos += 2;
                    self.push(TokenKind::Punct("::"), line);
                }
                c if is_ident_start(c) => {
                    let line = self.line;
                    let from = self.pos;
                    while self.peek(0).is_some_and(is_ident_char) {
                        self.pos += 1;
                    }
                    let word = &self.src[from..self.pos];
                    match (word, self.peek(0)) {
                        (b"L" | b"u" | b"U" | b"u8", Some(q @ (b'"' | b'\''))) => {
                            self.quoted(q);
                            self.push(TokenKind::Literal, line);
                        }
                        (b"R" | b"LR" | b"uR" | b"UR" | b"u8R", Some(b'"')) => {
                            self.raw_string();
                            self.push(TokenKind::Literal, line);
                        }
                        _ => {
                            let word = String::from_utf8_lossy(word).into_owned();
                            self.push(TokenKind::Ident(word), line);
                        }
                    }
                }
                c => {
                    let line = self.line;
                    self.pos += 1;
                    self.push(TokenKind::Punct(punct(c)), line);
                }
            }
        }
        self.out
    }
}

pub fn tokenize(source: &str) -> SourceUnit {
    tokenize_path("", source)
}

pub fn tokenize_path(path: &str, source: &str) -> SourceUnit {
    Lexer {
        src: source.as_bytes(),
        pos: 0,
        line: 1,
        line_start: true,
        out: SourceUnit {
            path: path.to_string(),
            ..Default::default()
        },
    }
    .run()
}
