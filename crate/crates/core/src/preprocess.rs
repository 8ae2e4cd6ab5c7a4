// SPDX-License-Identifier: Apache-2.0

//! Compiler directives: `` `define ``, `` `include ``, `` `ifdef `` and friends.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::Diagnostic;
use crate::lexer::{tokenize, Token, TokenKind};

const MAX_INCLUDE_DEPTH: usize = 16;
const MAX_EXPANSION_DEPTH: usize = 32;

/// Supplies the text of `` `include `` files.
pub trait IncludeResolver {
    /// Returns the resolved path and contents of `name` as included from `from`.
    fn resolve(&self, name: &str, from: &str) -> Option<(String, String)>;
}

/// Resolver for sources parsed from memory; every include is reported missing.
pub struct NoIncludes;

impl IncludeResolver for NoIncludes {
    fn resolve(&self, _name: &str, _from: &str) -> Option<(String, String)> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Macro {
    pub params: Option<Vec<String>>,
    pub body: Vec<Token>,
}

pub type MacroTable = BTreeMap<String, Macro>;

/// Directives that consume the rest of their line.
const LINE_DIRECTIVES: &[&str] = &[
    "`timescale",
    "`default_nettype",
    "`pragma",
    "`line",
    "`begin_keywords",
    "`unconnected_drive",
    "`protect",
];

const BARE_DIRECTIVES: &[&str] = &[
    "`resetall",
    "`celldefine",
    "`endcelldefine",
    "`nounconnected_drive",
    "`end_keywords",
    "`endprotect",
    "`undefineall",
];

struct Cond {
    /// Tokens in the current branch are kept.
    active: bool,
    /// Some branch of this group has been taken already.
    taken: bool,
    parent_active: bool,
}

pub struct Preprocessor<'r> {
    resolver: &'r dyn IncludeResolver,
    pub macros: MacroTable,
    pub diagnostics: Vec<Diagnostic>,
}

impl<'r> Preprocessor<'r> {
    pub fn new(resolver: &'r dyn IncludeResolver) -> Self {
        Self { resolver, macros: MacroTable::new(), diagnostics: Vec::new() }
    }

    pub fn run(&mut self, tokens: Vec<Token>, file: &str) -> Vec<Token> {
        let mut out = Vec::with_capacity(tokens.len());
        self.process(tokens, file, 0, &mut out);
        out
    }

    fn process(&mut self, tokens: Vec<Token>, file: &str, depth: usize, out: &mut Vec<Token>) {
        let mut conds: Vec<Cond> = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let tok = &tokens[i];
            let active = conds.last().is_none_or(|c| c.active);
            if tok.kind != TokenKind::Directive {
                if active {
                    out.push(tok.clone());
                }
                i += 1;
                continue;
            }
            let name = tok.text.as_str();
            let line = tok.line;
            match name {
                "`ifdef" | "`ifndef" | "`elsif" => {
                    let arg = tokens.get(i + 1).filter(|t| t.line == line && t.is_ident());
                    let defined = arg.is_some_and(|t| self.macros.contains_key(&t.text));
                    let cond = if name == "`ifndef" { !defined } else { defined };
                    if arg.is_none() {
                        self.diagnostics.push(Diagnostic::warning(line, format!("{name} without a macro name")));
                    }
                    if name == "`elsif" {
                        match conds.last_mut() {
                            Some(c) => {
                                c.active = c.parent_active && !c.taken && cond;
                                c.taken |= c.active;
                            }
                            None => self.diagnostics.push(Diagnostic::warning(line, "`elsif without `ifdef")),
                        }
                    } else {
                        let take = active && cond;
                        conds.push(Cond { active: take, taken: take, parent_active: active });
                    }
                    i += if arg.is_some() { 2 } else { 1 };
                }
                "`else" => {
                    match conds.last_mut() {
                        Some(c) => {
                            c.active = c.parent_active && !c.taken;
                            c.taken = true;
                        }
                        None => self.diagnostics.push(Diagnostic::warning(line, "`else without `ifdef")),
                    }
                    i += 1;
                }
                "`endif" => {
                    if conds.pop().is_none() {
                        self.diagnostics.push(Diagnostic::warning(line, "`endif without `ifdef"));
                    }
                    i += 1;
                }
                _ if !active => i += 1,
                "`define" => {
                    if let Some(text) = tokens.get(i + 1).filter(|t| t.kind == TokenKind::MacroText) {
                        self.define(&text.text, line);
                        i += 2;
                    } else {
                        i += 1;
                    }
                }
                "`undef" => {
                    if let Some(t) = tokens.get(i + 1).filter(|t| t.is_ident()) {
                        self.macros.remove(&t.text);
                        i += 2;
                    } else {
                        i += 1;
                    }
                }
                "`include" => {
                    i += 1;
                    match tokens.get(i).filter(|t| t.kind == TokenKind::Str) {
                        Some(t) => {
                            let target = t.text.trim_matches('"').to_string();
                            i += 1;
                            self.include(&target, file, line, depth, out);
                        }
                        None => {
                            // `include <file>`: skip to end of line.
                            while i < tokens.len() && tokens[i].line == line {
                                i += 1;
                            }
                            self.diagnostics.push(Diagnostic::warning(line, "unsupported `include form"));
                        }
                    }
                }
                _ if LINE_DIRECTIVES.contains(&name) => {
                    i += 1;
                    while i < tokens.len() && tokens[i].line == line {
                        i += 1;
                    }
                }
                _ if BARE_DIRECTIVES.contains(&name) => i += 1,
                _ => {
                    i = self.expand_usage(&tokens, i, out, 0);
                }
            }
        }
        if !conds.is_empty() {
            self.diagnostics.push(Diagnostic::warning(
                tokens.last().map_or(0, |t| t.line),
                "unterminated `ifdef",
            ));
        }
    }

    fn define(&mut self, raw: &str, line: u32) {
        let text = raw.trim_start();
        let name_len = text
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '$'))
            .unwrap_or(text.len());
        if name_len == 0 {
            self.diagnostics.push(Diagnostic::warning(line, "`define without a name"));
            return;
        }
        let name = &text[..name_len];
        let mut rest = &text[name_len..];
        let mut params = None;
        if rest.starts_with('(') {
            if let Some(close) = rest.find(')') {
                let list = &rest[1..close];
                params = Some(
                    list.split(',')
                        .map(|p| p.split('=').next().unwrap_or("").trim().to_string())
                        .filter(|p| !p.is_empty())
                        .collect(),
                );
                rest = &rest[close + 1..];
            }
        }
        let body = tokenize(rest)
            .into_iter()
            .map(|mut t| {
                t.line = line;
                t
            })
            .collect();
        self.macros.insert(name.into(), Macro { params, body });
    }

    fn include(&mut self, target: &str, file: &str, line: u32, depth: usize, out: &mut Vec<Token>) {
        if depth >= MAX_INCLUDE_DEPTH {
            self.diagnostics.push(Diagnostic::error(line, format!("include depth exceeded at \"{target}\"")));
            return;
        }
        match self.resolver.resolve(target, file) {
            Some((path, text)) => {
                let toks = tokenize(&text);
                self.process(toks, &path, depth + 1, out);
            }
            None => self
                .diagnostics
                .push(Diagnostic::warning(line, format!("include file \"{target}\" not found"))),
        }
    }

    /// Expand the macro usage at `tokens[i]`; returns the index after it.
    fn expand_usage(&mut self, tokens: &[Token], i: usize, out: &mut Vec<Token>, depth: usize) -> usize {
        let tok = &tokens[i];
        let name = &tok.text[1..];
        let Some(mac) = self.macros.get(name).cloned() else {
            self.diagnostics.push(Diagnostic::warning(tok.line, format!("undefined macro {}", tok.text)));
            out.push(Token::new(TokenKind::Ident, tok.text.clone(), tok.line));
            return i + 1;
        };
        if depth >= MAX_EXPANSION_DEPTH {
            self.diagnostics.push(Diagnostic::error(tok.line, format!("macro {} expands recursively", tok.text)));
            return i + 1;
        }
        let mut next = i + 1;
        let body = match &mac.params {
            None => mac.body.clone(),
            Some(params) => {
                let Some((args, after)) = macro_args(tokens, next) else {
                    self.diagnostics.push(Diagnostic::warning(tok.line, format!("macro {} used without arguments", tok.text)));
                    return next;
                };
                next = after;
                let mut body = Vec::new();
                for t in &mac.body {
                    match params.iter().position(|p| t.is_ident() && *p == t.text) {
                        Some(k) => body.extend(args.get(k).cloned().unwrap_or_default()),
                        None => body.push(t.clone()),
                    }
                }
                body
            }
        };
        let body: Vec<Token> = body
            .into_iter()
            .map(|mut t| {
                t.line = tok.line;
                t
            })
            .collect();
        let mut j = 0;
        while j < body.len() {
            if body[j].kind == TokenKind::Directive {
                j = self.expand_usage(&body, j, out, depth + 1);
            } else {
                out.push(body[j].clone());
                j += 1;
            }
        }
        next
    }
}

/// Parse `( a, b, ... )` starting at `start`. Returns the argument token lists
/// and the index after the closing parenthesis.
fn macro_args(tokens: &[Token], start: usize) -> Option<(Vec<Vec<Token>>, usize)> {
    if !tokens.get(start)?.is_op("(") {
        return None;
    }
    let mut args = Vec::new();
    let mut cur = Vec::new();
    let mut depth = 0usize;
    let mut i = start + 1;
    while let Some(t) = tokens.get(i) {
        if t.kind == TokenKind::Op {
            match t.text.as_str() {
                "(" | "[" | "{" | "'{" => depth += 1,
                ")" if depth == 0 => {
                    args.push(cur);
                    return Some((args, i + 1));
                }
                ")" | "]" | "}" => depth = depth.saturating_sub(1),
                "," if depth == 0 => {
                    args.push(core::mem::take(&mut cur));
                    i += 1;
                    continue;
                }
                _ => {}
            }
        }
        cur.push(t.clone());
        i += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pp(src: &str) -> (Vec<String>, Vec<Diagnostic>) {
        let mut p = Preprocessor::new(&NoIncludes);
        let toks = p.run(tokenize(src), "t.v");
        (toks.into_iter().map(|t| t.text).collect(), p.diagnostics)
    }

    #[test]
    fn object_macro_substitution() {
        let (t, d) = pp("`define W 8\nwire [`W-1:0] x;");
        assert_eq!(t, vec!["wire", "[", "8", "-", "1", ":", "0", "]", "x", ";"]);
        assert!(d.is_empty());
    }

    #[test]
    fn function_macro_substitution() {
        let (t, _) = pp("`define MSB(w) (w-1)\nwire [`MSB(16):0] x;");
        assert_eq!(t, vec!["wire", "[", "(", "16", "-", "1", ")", ":", "0", "]", "x", ";"]);
    }

    #[test]
    fn ifdef_takes_defined_branch_else_else_branch() {
        let (t, _) = pp("`define FAST\n`ifdef FAST a `else b `endif\n`ifdef SLOW c `elsif FAST d `else e `endif");
        assert_eq!(t, vec!["a", "d"]);
        let (t, _) = pp("`ifndef X y `endif");
        assert_eq!(t, vec!["y"]);
    }

    #[test]
    fn nested_inactive_regions() {
        let (t, _) = pp("`ifdef A `ifdef B x `else y `endif `else z `endif");
        assert_eq!(t, vec!["z"]);
    }

    #[test]
    fn missing_include_is_a_diagnostic() {
        let (t, d) = pp("`include \"defs.vh\"\nwire a;");
        assert_eq!(t, vec!["wire", "a", ";"]);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn includes_are_spliced() {
        struct One;
        impl IncludeResolver for One {
            fn resolve(&self, name: &str, _from: &str) -> Option<(String, String)> {
                (name == "defs.vh").then(|| ("defs.vh".into(), "`define N 4\n".into()))
            }
        }
        let mut p = Preprocessor::new(&One);
        let toks = p.run(tokenize("`include \"defs.vh\"\nwire [`N:0] a;"), "top.v");
        let t: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(t, vec!["wire", "[", "4", ":", "0", "]", "a", ";"]);
    }

    #[test]
    fn timescale_line_is_dropped_and_unknown_macro_kept() {
        let (t, d) = pp("`timescale 1ns/1ps\nwire [`UNKNOWN:0] a;");
        assert_eq!(t, vec!["wire", "[", "`UNKNOWN", ":", "0", "]", "a", ";"]);
        assert_eq!(d.len(), 1);
    }
}
