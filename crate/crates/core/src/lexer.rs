// SPDX-License-Identifier: Apache-2.0

//! Tokenizer for Verilog and SystemVerilog source text.

use alloc::string::String;
use alloc::vec::Vec;

use crate::keywords::is_keyword;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    /// `$display`, `$clog2`, ...
    SystemIdent,
    Number,
    Str,
    /// A backtick word: either a compiler directive or a macro usage.
    Directive,
    /// Raw remainder of a `` `define `` line, continuations joined.
    MacroText,
    Op,
    /// Unterminated comment, attribute or string. Holds the rest of the input.
    Unterminated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
}

impl Token {
    pub fn new(kind: TokenKind, text: impl Into<String>, line: u32) -> Self {
        Self { kind, text: text.into(), line }
    }

    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Op && self.text == op
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == kw
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Ident
    }
}

// Longest first within each leading character.
const OPERATORS: &[&str] = &[
    "<<<=", ">>>=", "===", "!==", "==?", "!=?", "<<<", ">>>", "<<=", ">>=", "|->", "|=>", "<->",
    "->>", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "**", "->", "+:", "-:", "::", "~&",
    "~|", "~^", "^~", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", ".*", "##",
    "'{",
];

const SINGLE_OPS: &str = "()[]{};:,.=<>+-*/%&|^~!?#@'";

/// Tokenize source bytes, replacing invalid UTF-8.
pub fn tokenize_bytes(source: &[u8]) -> Vec<Token> {
    tokenize(&String::from_utf8_lossy(source))
}

/// Split `source` into tokens. Comments and `(* ... *)` attributes are dropped.
pub fn tokenize(source: &str) -> Vec<Token> {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src, bytes: src.as_bytes(), pos: 0, line: 1, out: Vec::new() }
    }

    fn peek(&self, off: usize) -> u8 {
        self.bytes.get(self.pos + off).copied().unwrap_or(0)
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: u32) {
        let text = &self.src[start..self.pos];
        self.out.push(Token::new(kind, text, line));
    }

    fn count_lines(&mut self, start: usize, end: usize) {
        self.line += self.bytes[start..end].iter().filter(|&&b| b == b'\n').count() as u32;
    }

    fn unterminated(&mut self, start: usize, line: u32) {
        self.pos = self.bytes.len();
        self.count_lines(start, self.pos);
        self.push(TokenKind::Unterminated, start, line);
    }

    fn run(mut self) -> Vec<Token> {
        while self.pos < self.bytes.len() {
            let c = self.peek(0);
            let start = self.pos;
            let line = self.line;
            match c {
                b'\n' => {
                    self.line += 1;
                    self.pos += 1;
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                b'/' if self.peek(1) == b'/' => self.skip_line_comment(),
                b'/' if self.peek(1) == b'*' => {
                    if !self.skip_block_comment() {
                        self.unterminated(start, line);
                    }
                }
                b'(' if self.peek(1) == b'*' && !self.star_paren_follows() => {
                    match self.src[self.pos + 2..].find("*)") {
                        Some(off) => {
                            let end = self.pos + 2 + off + 2;
                            self.count_lines(self.pos, end);
                            self.pos = end;
                        }
                        None => self.unterminated(start, line),
                    }
                }
                b'"' => self.string(start, line),
                b'\\' => {
                    self.pos += 1;
                    while self.pos < self.bytes.len() && !self.peek(0).is_ascii_whitespace() {
                        self.pos += 1;
                    }
                    self.push(TokenKind::Ident, start, line);
                }
                b'$' if is_ident_start(self.peek(1)) => {
                    self.pos += 1;
                    self.ident_tail();
                    self.push(TokenKind::SystemIdent, start, line);
                }
                b'`' if is_ident_start(self.peek(1)) => {
                    self.pos += 1;
                    self.ident_tail();
                    self.push(TokenKind::Directive, start, line);
                    if &self.src[start..self.pos] == "`define" {
                        self.macro_text();
                    }
                }
                c if is_ident_start(c) => {
                    self.ident_tail();
                    let kind = if is_keyword(&self.src[start..self.pos]) {
                        TokenKind::Keyword
                    } else {
                        TokenKind::Ident
                    };
                    self.push(kind, start, line);
                }
                c if c.is_ascii_digit() => self.number(start, line),
                b'\'' if self.based_literal_follows() => self.number(start, line),
                _ => self.operator(start, line),
            }
        }
        self.out
    }

    /// `(*)` in `@(*)` is not an attribute.
    fn star_paren_follows(&self) -> bool {
        let mut i = self.pos + 2;
        while i < self.bytes.len() && self.bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        self.bytes.get(i) == Some(&b')')
    }

    fn skip_line_comment(&mut self) {
        while self.pos < self.bytes.len() && self.peek(0) != b'\n' {
            self.pos += 1;
        }
    }

    fn skip_block_comment(&mut self) -> bool {
        match self.src[self.pos + 2..].find("*/") {
            Some(off) => {
                let end = self.pos + 2 + off + 2;
                self.count_lines(self.pos, end);
                self.pos = end;
                true
            }
            None => false,
        }
    }

    fn ident_tail(&mut self) {
        while self.pos < self.bytes.len() && is_ident_char(self.peek(0)) {
            self.pos += 1;
        }
    }

    fn string(&mut self, start: usize, line: u32) {
        self.pos += 1;
        loop {
            match self.peek(0) {
                0 if self.pos >= self.bytes.len() => {
                    self.pos = start;
                    self.unterminated(start, line);
                    return;
                }
                b'\\' => {
                    if self.peek(1) == b'\n' {
                        self.line += 1;
                    }
                    self.pos += 2;
                }
                b'"' => {
                    self.pos += 1;
                    break;
                }
                b'\n' => {
                    self.line += 1;
                    self.pos += 1;
                }
                _ => self.pos += 1,
            }
        }
        self.pos = self.pos.min(self.bytes.len());
        self.push(TokenKind::Str, start, line);
    }

    fn based_literal_follows(&self) -> bool {
        let mut i = self.pos + 1;
        if matches!(self.bytes.get(i), Some(b's' | b'S')) {
            i += 1;
        }
        match self.bytes.get(i) {
            Some(b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H') => true,
            // '0 '1 'x 'z fill literals, but not '{ or '(
            Some(b'0' | b'1' | b'x' | b'X' | b'z' | b'Z') => {
                !matches!(self.bytes.get(i + 1), Some(c) if is_ident_char(*c))
            }
            _ => false,
        }
    }

    fn number(&mut self, start: usize, line: u32) {
        while self.peek(0).is_ascii_digit() || self.peek(0) == b'_' {
            self.pos += 1;
        }
        // real: 1.5, 2e3
        if self.peek(0) == b'.' && self.peek(1).is_ascii_digit() {
            self.pos += 1;
            while self.peek(0).is_ascii_digit() || self.peek(0) == b'_' {
                self.pos += 1;
            }
        }
        if matches!(self.peek(0), b'e' | b'E')
            && (self.peek(1).is_ascii_digit()
                || (matches!(self.peek(1), b'+' | b'-') && self.peek(2).is_ascii_digit()))
        {
            self.pos += 2;
            while self.peek(0).is_ascii_digit() {
                self.pos += 1;
            }
        }
        // Size and base may be separated by whitespace: 8 'hFF
        let mut look = self.pos;
        while look < self.bytes.len() && matches!(self.bytes[look], b' ' | b'\t') {
            look += 1;
        }
        if self.bytes.get(look) == Some(&b'\'') {
            let saved = self.pos;
            self.pos = look;
            if self.based_literal_follows() {
                self.based_tail();
            } else {
                self.pos = saved;
            }
        } else if start == self.pos && self.peek(0) == b'\'' {
            self.based_tail();
        }
        self.push(TokenKind::Number, start, line);
    }

    fn based_tail(&mut self) {
        self.pos += 1;
        if matches!(self.peek(0), b's' | b'S') {
            self.pos += 1;
        }
        if matches!(self.peek(0), b'b' | b'B' | b'o' | b'O' | b'd' | b'D' | b'h' | b'H') {
            self.pos += 1;
            while matches!(self.peek(0), b' ' | b'\t') {
                self.pos += 1;
            }
        }
        while self.peek(0).is_ascii_hexdigit()
            || matches!(self.peek(0), b'_' | b'x' | b'X' | b'z' | b'Z' | b'?')
        {
            self.pos += 1;
        }
    }

    fn operator(&mut self, start: usize, line: u32) {
        let rest = &self.src[self.pos..];
        if let Some(op) = OPERATORS.iter().find(|op| rest.starts_with(**op)) {
            self.pos += op.len();
        } else if SINGLE_OPS.as_bytes().contains(&self.peek(0)) {
            self.pos += 1;
        } else {
            // Stray byte or multi-byte character: keep it as a one-char operator.
            let ch = rest.chars().next().map_or(1, char::len_utf8);
            self.pos += ch;
        }
        self.push(TokenKind::Op, start, line);
    }

    fn macro_text(&mut self) {
        let line = self.line;
        let mut text = String::new();
        while self.pos < self.bytes.len() {
            let c = self.peek(0);
            if c == b'\\' && (self.peek(1) == b'\n' || (self.peek(1) == b'\r' && self.peek(2) == b'\n')) {
                self.pos += if self.peek(1) == b'\r' { 3 } else { 2 };
                self.line += 1;
                text.push(' ');
            } else if c == b'\n' {
                break;
            } else if c == b'/' && self.peek(1) == b'/' {
                self.skip_line_comment();
                break;
            } else if c == b'/' && self.peek(1) == b'*' {
                if !self.skip_block_comment() {
                    break;
                }
                text.push(' ');
            } else {
                let ch = self.src[self.pos..].chars().next().unwrap_or(' ');
                text.push(ch);
                self.pos += ch.len_utf8();
            }
        }
        self.out.push(Token::new(TokenKind::MacroText, text, line));
    }
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'$'
}
