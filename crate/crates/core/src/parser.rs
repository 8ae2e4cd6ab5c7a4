// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser for the RTL subset the analysis inspects.
//!
//! The grammar covers modules with ANSI and non-ANSI ports, net and variable
//! declarations, parameters, continuous assignments, `always`/`initial`
//! blocks with `if`/`case`/loops, gate primitives and module instantiations.
//! Everything else (generate regions, functions, tasks, assertions, classes,
//! interfaces, packages) is skipped with a diagnostic. Errors inside a module
//! skip the offending item; a module that never reaches `endmodule` is kept
//! as far as it was parsed and the next `module` keyword starts afresh.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::ast::*;
use crate::expr::{BinaryOp, Expr, UnaryOp};
use crate::lexer::{tokenize, Token, TokenKind};
use crate::preprocess::{IncludeResolver, Preprocessor};
use crate::width::resolve_widths;

/// Parse one file's text. `path` is recorded on every module and passed to
/// the include resolver.
pub fn parse_source(path: &str, text: &str, resolver: &dyn IncludeResolver) -> SourceUnit {
    let mut pp = Preprocessor::new(resolver);
    let tokens = pp.run(tokenize(text), path);
    let mut diagnostics = pp.diagnostics;
    for t in tokens.iter().filter(|t| t.kind == TokenKind::Unterminated) {
        diagnostics.push(Diagnostic::error(t.line, "unterminated comment, attribute or string"));
    }
    let tokens: Vec<Token> = tokens.into_iter().filter(|t| t.kind != TokenKind::Unterminated).collect();
    let mut parser = Parser::new(&tokens, path);
    let modules = parser.source_text();
    diagnostics.extend(parser.diags);
    diagnostics.sort_by_key(|d| d.line);
    let line_count = text.lines().count();
    SourceUnit { path: path.into(), modules, diagnostics, line_count }
}

#[derive(Debug)]
struct ParseError {
    line: u32,
    message: String,
}

type PResult<T> = Result<T, ParseError>;

const DIRECTIONS: &[&str] = &["input", "output", "inout", "ref"];

const NET_TYPES: &[&str] = &[
    "wire", "tri", "tri0", "tri1", "wand", "wor", "triand", "trior", "trireg", "uwire", "supply0",
    "supply1",
];

const VAR_TYPES: &[&str] = &["reg", "logic", "bit", "var"];

const FIXED_TYPES: &[(&str, u32)] = &[
    ("integer", 32),
    ("int", 32),
    ("byte", 8),
    ("shortint", 16),
    ("longint", 64),
    ("time", 64),
    ("real", 64),
    ("realtime", 64),
    ("shortreal", 32),
];

const GATES: &[&str] = &[
    "and", "nand", "or", "nor", "xor", "xnor", "buf", "not", "bufif0", "bufif1", "notif0",
    "notif1",
];

/// Constructs skipped wholesale, with their terminating keyword.
const SKIPPED_REGIONS: &[(&str, &str)] = &[
    ("generate", "endgenerate"),
    ("function", "endfunction"),
    ("task", "endtask"),
    ("specify", "endspecify"),
    ("property", "endproperty"),
    ("sequence", "endsequence"),
    ("covergroup", "endgroup"),
    ("clocking", "endclocking"),
    ("checker", "endchecker"),
    ("class", "endclass"),
    ("interface", "endinterface"),
    ("package", "endpackage"),
    ("program", "endprogram"),
    ("primitive", "endprimitive"),
    ("config", "endconfig"),
    ("table", "endtable"),
];

#[derive(Debug, Clone)]
struct TypeSpec {
    base: BaseType,
    dims: Vec<PackedDim>,
    /// Declared with a net kind (wire, tri, ...): initializers are continuous assignments.
    net: bool,
}

impl TypeSpec {
    fn implicit() -> Self {
        Self { base: BaseType::Bit, dims: Vec::new(), net: true }
    }
}

struct Parser<'t> {
    toks: &'t [Token],
    pos: usize,
    file: &'t str,
    diags: Vec<Diagnostic>,
    /// Token span of the last inline enum body, awaiting member capture.
    last_enum: Option<(usize, usize)>,
}

/// Per-module state while parsing items.
struct ModuleCtx {
    module: ModuleDef,
    /// Non-ANSI header port names, in order.
    header_ports: Vec<String>,
    ansi: bool,
    /// Names declared so far, for duplicate detection.
    declared: BTreeMap<String, usize>,
}

impl<'t> Parser<'t> {
    fn new(toks: &'t [Token], file: &'t str) -> Self {
        Self { toks, pos: 0, file, diags: Vec::new(), last_enum: None }
    }

    // ---- cursor helpers ----

    fn peek(&self) -> Option<&'t Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'t Token> {
        self.toks.get(self.pos + n)
    }

    fn line(&self) -> u32 {
        self.peek().or_else(|| self.toks.last()).map_or(0, |t| t.line)
    }

    fn bump(&mut self) -> Option<&'t Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_op(&self, op: &str) -> bool {
        self.peek().is_some_and(|t| t.is_op(op))
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.is_kw(kw))
    }

    fn at_any_kw(&self, kws: &[&'static str]) -> Option<&'static str> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword => kws.iter().find(|k| **k == t.text).copied(),
            _ => None,
        }
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.at_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(ParseError { line: self.line(), message: message.into() })
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            let found = self.peek().map_or("end of file", |t| t.text.as_str());
            self.err(format!("expected `{op}`, found `{found}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(t) if t.is_ident() => {
                self.pos += 1;
                Ok(t.text.clone())
            }
            Some(t) => self.err(format!("expected identifier, found `{}`", t.text)),
            None => self.err("expected identifier, found end of file"),
        }
    }

    fn warn(&mut self, line: u32, message: impl Into<String>) {
        self.diags.push(Diagnostic::warning(line, message));
    }

    /// Skip a balanced `( ... )`, `[ ... ]` or `{ ... }` group at the cursor.
    fn skip_group(&mut self) {
        let open = match self.peek() {
            Some(t) if t.kind == TokenKind::Op => t.text.clone(),
            _ => return,
        };
        let close = match open.as_str() {
            "(" => ")",
            "[" => "]",
            "{" | "'{" => "}",
            _ => return,
        };
        let mut depth = 0usize;
        while let Some(t) = self.bump() {
            if t.kind != TokenKind::Op {
                continue;
            }
            if t.text == open || (close == "}" && (t.text == "{" || t.text == "'{")) {
                depth += 1;
            } else if t.text == close {
                depth -= 1;
                if depth == 0 {
                    return;
                }
            }
        }
    }

    /// Skip to just past the next `;` outside brackets, or stop before `end`-like
    /// keywords that close the enclosing construct.
    fn skip_to_semicolon(&mut self) {
        while let Some(t) = self.peek() {
            if t.is_op(";") {
                self.pos += 1;
                return;
            }
            if t.kind == TokenKind::Keyword && matches!(t.text.as_str(), "endmodule" | "module" | "macromodule") {
                return;
            }
            if t.kind == TokenKind::Op && matches!(t.text.as_str(), "(" | "[" | "{" | "'{") {
                self.skip_group();
            } else {
                self.pos += 1;
            }
        }
    }

    /// Skip to just past `end_kw`, honouring nesting of `start_kw`.
    fn skip_region(&mut self, start_kw: &str, end_kw: &str) {
        let mut depth = 0usize;
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword {
                if t.text == start_kw {
                    depth += 1;
                } else if t.text == end_kw {
                    self.pos += 1;
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        self.skip_end_label();
                        return;
                    }
                    continue;
                } else if t.text == "endmodule" && end_kw != "endmodule" {
                    return;
                }
            }
            self.pos += 1;
        }
    }

    fn skip_end_label(&mut self) {
        if self.at_op(":") && self.peek_at(1).is_some_and(|t| t.is_ident()) {
            self.pos += 2;
        }
    }

    /// Skip a `begin ... end` block, counting nested begin/end and fork/join.
    fn skip_block(&mut self) {
        let mut depth = 0usize;
        while let Some(t) = self.bump() {
            if t.kind != TokenKind::Keyword {
                continue;
            }
            match t.text.as_str() {
                "begin" | "fork" | "case" | "casez" | "casex" => depth += 1,
                "end" | "join" | "join_any" | "join_none" | "endcase" => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        self.skip_end_label();
                        return;
                    }
                }
                "endmodule" => {
                    self.pos -= 1;
                    return;
                }
                _ => {}
            }
        }
    }

    // ---- top level ----

    fn source_text(&mut self) -> Vec<ModuleDef> {
        let mut modules = Vec::new();
        while let Some(t) = self.peek() {
            if t.is_kw("module") || t.is_kw("macromodule") {
                if let Some(m) = self.module() {
                    modules.push(m);
                }
                continue;
            }
            if t.kind == TokenKind::Keyword {
                if let Some((start, end)) = SKIPPED_REGIONS.iter().find(|(s, _)| *s == t.text) {
                    self.warn(t.line, format!("skipped unsupported `{start}` region"));
                    self.skip_region(start, end);
                    continue;
                }
            }
            self.pos += 1;
        }
        modules
    }

    fn module(&mut self) -> Option<ModuleDef> {
        let start_line = self.line();
        self.pos += 1;
        while self.eat_kw("automatic") || self.eat_kw("static") {}
        let name = match self.ident() {
            Ok(n) => n,
            Err(e) => {
                self.diags.push(Diagnostic::error(e.line, format!("malformed module header: {}", e.message)));
                self.recover_to_next_module();
                return None;
            }
        };
        let mut ctx = ModuleCtx {
            module: ModuleDef::new(name.clone(), self.file, start_line),
            header_ports: Vec::new(),
            ansi: false,
            declared: BTreeMap::new(),
        };
        if let Err(e) = self.module_header(&mut ctx) {
            self.diags.push(Diagnostic::error(e.line, format!("malformed header of module `{name}`: {}", e.message)));
            self.recover_to_next_module();
            return None;
        }
        let closed = self.module_items(&mut ctx);
        if !closed {
            self.diags.push(Diagnostic::error(
                self.line(),
                format!("module `{name}` is missing `endmodule`"),
            ));
        }
        Some(self.finish_module(ctx))
    }

    fn recover_to_next_module(&mut self) {
        while let Some(t) = self.peek() {
            if t.is_kw("endmodule") {
                self.pos += 1;
                return;
            }
            if t.is_kw("module") || t.is_kw("macromodule") {
                return;
            }
            self.pos += 1;
        }
    }

    fn finish_module(&mut self, ctx: ModuleCtx) -> ModuleDef {
        let ModuleCtx { mut module, header_ports, ansi, .. } = ctx;
        if !ansi {
            // Non-ANSI: order ports by the header list.
            let mut ordered = Vec::with_capacity(header_ports.len());
            for name in &header_ports {
                match module.ports.iter().position(|p| &p.name == name) {
                    Some(idx) => ordered.push(module.ports.remove(idx)),
                    None => {
                        self.warn(module.start_line, format!("port `{name}` of `{}` has no direction declaration", module.name));
                        ordered.push(SignalDecl::new(name.clone(), Direction::Inout, BaseType::Bit, Vec::new(), module.start_line));
                    }
                }
            }
            ordered.append(&mut module.ports);
            module.ports = ordered;
        }
        resolve_widths(&mut module);
        module.collect_unresolved();
        module
    }

    fn module_header(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        while self.at_kw("import") {
            self.skip_to_semicolon();
        }
        if self.eat_op("#") {
            self.param_port_list(ctx)?;
        }
        if self.at_op("(") {
            self.port_list(ctx)?;
        }
        self.expect_op(";")
    }

    fn param_port_list(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        self.expect_op("(")?;
        let mut local = false;
        loop {
            if self.eat_op(")") {
                return Ok(());
            }
            if self.eat_kw("parameter") {
                local = false;
            } else if self.eat_kw("localparam") {
                local = true;
            }
            if self.at_kw("type") {
                // Type parameters carry no integer value.
                self.pos += 1;
                let line = self.line();
                let name = self.ident()?;
                ctx.module.param_decls.push(ParamDecl { name, value: None, local, line });
                if self.eat_op("=") {
                    self.skip_until_any(&[",", ")"]);
                }
            } else {
                self.skip_param_type();
                let line = self.line();
                let name = self.ident()?;
                while self.at_op("[") {
                    self.skip_group();
                }
                let value = if self.eat_op("=") { Some(self.expr()?) } else { None };
                ctx.module.param_decls.push(ParamDecl { name, value, local, line });
            }
            if !self.eat_op(",") {
                self.expect_op(")")?;
                return Ok(());
            }
        }
    }

    /// Skip tokens until one of `ops` at bracket depth zero (not consumed).
    fn skip_until_any(&mut self, ops: &[&str]) {
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Op {
                if ops.contains(&t.text.as_str()) {
                    return;
                }
                if matches!(t.text.as_str(), "(" | "[" | "{" | "'{") {
                    self.skip_group();
                    continue;
                }
            }
            if t.is_kw("endmodule") {
                return;
            }
            self.pos += 1;
        }
    }

    /// Skip an optional data type in front of a parameter name.
    fn skip_param_type(&mut self) {
        loop {
            match self.peek() {
                Some(t) if t.kind == TokenKind::Keyword
                    && (VAR_TYPES.contains(&t.text.as_str())
                        || FIXED_TYPES.iter().any(|(n, _)| *n == t.text)
                        || matches!(t.text.as_str(), "signed" | "unsigned" | "string")) =>
                {
                    self.pos += 1;
                }
                Some(t) if t.is_op("[") => self.skip_group(),
                // user type: `my_t NAME =`
                Some(t) if t.is_ident() && self.peek_at(1).is_some_and(|n| n.is_ident()) => self.pos += 1,
                Some(t) if t.is_ident() && self.peek_at(1).is_some_and(|n| n.is_op("::")) => self.pos += 2,
                _ => return,
            }
        }
    }

    fn port_list(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        self.expect_op("(")?;
        if self.eat_op(")") {
            ctx.ansi = true;
            return Ok(());
        }
        let first = self.peek();
        let ansi = match first {
            Some(t) if t.kind == TokenKind::Keyword => true,
            // `type_t name` or `intf.modport name`
            Some(t) if t.is_ident() => self.peek_at(1).is_some_and(|n| n.is_ident() || n.is_op(".") || n.is_op("::") || n.is_op("[")),
            _ => false,
        };
        ctx.ansi = ansi;
        if ansi {
            self.ansi_ports(ctx)
        } else {
            self.non_ansi_ports(ctx)
        }
    }

    fn non_ansi_ports(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        loop {
            if self.eat_op(".") {
                // .name(expr)
                let name = self.ident()?;
                if self.at_op("(") {
                    self.skip_group();
                }
                ctx.header_ports.push(name);
            } else if self.at_op("{") {
                let line = self.line();
                self.skip_group();
                self.warn(line, "concatenated port expression ignored");
            } else {
                let name = self.ident()?;
                while self.at_op("[") {
                    self.skip_group();
                }
                ctx.header_ports.push(name);
            }
            if !self.eat_op(",") {
                return self.expect_op(")");
            }
        }
    }

    fn ansi_ports(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        let mut direction = Direction::Inout;
        let mut ty = TypeSpec::implicit();
        loop {
            let line = self.line();
            let mut fresh = false;
            if let Some(d) = self.at_any_kw(DIRECTIONS) {
                self.pos += 1;
                direction = match d {
                    "input" => Direction::Input,
                    "output" => Direction::Output,
                    _ => Direction::Inout,
                };
                fresh = true;
            }
            // interface port: `bus_if.master bus` or `bus_if bus`
            if !fresh
                && self.peek().is_some_and(|t| t.is_ident())
                && self.peek_at(1).is_some_and(|t| t.is_op("."))
            {
                self.skip_until_any(&[",", ")"]);
                self.warn(line, "interface port skipped");
                if !self.eat_op(",") {
                    return self.expect_op(")");
                }
                continue;
            }
            let has_type = self.starts_type();
            if fresh || has_type {
                ty = if has_type { self.data_type()? } else { TypeSpec::implicit() };
                if !has_type {
                    // `input [7:0] a` or `input signed a`
                    while self.eat_kw("signed") || self.eat_kw("unsigned") {}
                    ty.dims = self.packed_dims()?;
                }
            }
            let name = self.ident()?;
            while self.at_op("[") {
                self.skip_group();
            }
            if self.eat_op("=") {
                self.skip_until_any(&[",", ")"]);
            }
            self.add_signal(ctx, &name, direction, &ty, line);
            if !self.eat_op(",") {
                return self.expect_op(")");
            }
        }
    }

    /// True when the cursor is at the start of a data type.
    fn starts_type(&self) -> bool {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Keyword => {
                let w = t.text.as_str();
                NET_TYPES.contains(&w)
                    || VAR_TYPES.contains(&w)
                    || FIXED_TYPES.iter().any(|(n, _)| *n == w)
                    || matches!(w, "signed" | "unsigned" | "enum" | "struct" | "union")
            }
            Some(t) if t.is_ident() => {
                // user type followed by a name or dimensions then a name
                match self.peek_at(1) {
                    Some(n) if n.is_ident() => true,
                    Some(n) if n.is_op("::") => true,
                    Some(n) if n.is_op("[") => {
                        let mut i = self.pos + 1;
                        let mut depth = 0usize;
                        while let Some(tok) = self.toks.get(i) {
                            if tok.is_op("[") {
                                depth += 1;
                            } else if tok.is_op("]") {
                                depth -= 1;
                                if depth == 0 && !self.toks.get(i + 1).is_some_and(|t| t.is_op("[")) {
                                    return self.toks.get(i + 1).is_some_and(|t| t.is_ident());
                                }
                            }
                            i += 1;
                        }
                        false
                    }
                    _ => false,
                }
            }
            _ => false,
        }
    }

    /// Parse a data type: `[net kind] [var] [type] [signed] [dims]`.
    fn data_type(&mut self) -> PResult<TypeSpec> {
        let mut spec = TypeSpec { base: BaseType::Bit, dims: Vec::new(), net: false };
        let mut saw_kind = false;
        while let Some(t) = self.peek() {
            if t.kind == TokenKind::Keyword {
                let w = t.text.as_str();
                if NET_TYPES.contains(&w) {
                    spec.net = true;
                    saw_kind = true;
                    self.pos += 1;
                    // strength or delay
                    if self.at_op("(") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Keyword) {
                        self.skip_group();
                    }
                    continue;
                }
                if VAR_TYPES.contains(&w) {
                    saw_kind = true;
                    self.pos += 1;
                    continue;
                }
                if let Some((_, bits)) = FIXED_TYPES.iter().find(|(n, _)| *n == w) {
                    spec.base = BaseType::Fixed(*bits);
                    saw_kind = true;
                    self.pos += 1;
                    continue;
                }
                if matches!(w, "signed" | "unsigned") {
                    self.pos += 1;
                    continue;
                }
                if matches!(w, "enum" | "struct" | "union") {
                    let (base, dims) = self.anonymous_compound()?;
                    spec.base = base;
                    spec.dims = dims;
                    return Ok(spec);
                }
                break;
            }
            if t.is_ident() && !saw_kind {
                let next = self.peek_at(1);
                if next.is_some_and(|n| n.is_op("::")) {
                    let pkg = self.ident()?;
                    self.pos += 1;
                    let ty = self.ident()?;
                    spec.base = BaseType::Named(format!("{pkg}::{ty}"));
                    saw_kind = true;
                    continue;
                }
                if next.is_some_and(|n| n.is_ident() || n.is_op("[")) {
                    spec.base = BaseType::Named(t.text.clone());
                    saw_kind = true;
                    self.pos += 1;
                    continue;
                }
            }
            break;
        }
        let dims = self.packed_dims()?;
        spec.dims.extend(dims);
        if self.at_op("#") {
            self.skip_delay();
        }
        Ok(spec)
    }

    /// `enum [base] { ... }` or `struct packed { ... }` used inline as a type.
    /// Enum members are recorded on `pending_enum` by the caller.
    fn anonymous_compound(&mut self) -> PResult<(BaseType, Vec<PackedDim>)> {
        let kw = self.bump().map(|t| t.text.clone()).unwrap_or_default();
        if kw == "enum" {
            let (base, dims) = if self.at_op("{") {
                (BaseType::Fixed(32), Vec::new())
            } else {
                let t = self.data_type()?;
                (t.base, t.dims)
            };
            if !self.at_op("{") {
                return self.err("expected `{` in enum");
            }
            self.pending_enum_members();
            Ok((base, dims))
        } else {
            while self.eat_kw("packed") || self.eat_kw("signed") || self.eat_kw("unsigned") {}
            let line = self.line();
            if self.at_op("{") {
                self.skip_group();
            }
            self.warn(line, "struct/union type treated as unresolved width");
            Ok((BaseType::Named(kw), self.packed_dims()?))
        }
    }

    fn pending_enum_members(&mut self) {
        // Consumes `{ A, B = 3, C }`; members become localparams via `enum_members`.
        let start = self.pos;
        self.skip_group();
        self.last_enum = Some((start, self.pos));
    }

    fn packed_dims(&mut self) -> PResult<Vec<PackedDim>> {
        let mut dims = Vec::new();
        while self.eat_op("[") {
            let first = self.expr()?;
            if self.eat_op(":") {
                let second = self.expr()?;
                self.expect_op("]")?;
                dims.push(PackedDim::Range(first, second));
            } else if self.eat_op("+:") || self.eat_op("-:") {
                let _ = self.expr()?;
                self.expect_op("]")?;
                dims.push(PackedDim::Size(first));
            } else {
                self.expect_op("]")?;
                dims.push(PackedDim::Size(first));
            }
        }
        Ok(dims)
    }

    fn skip_delay(&mut self) {
        if !self.eat_op("#") {
            return;
        }
        if self.at_op("(") {
            self.skip_group();
        } else {
            self.pos += 1;
        }
    }

    fn add_signal(&mut self, ctx: &mut ModuleCtx, name: &str, direction: Direction, ty: &TypeSpec, line: u32) {
        let decl = SignalDecl::new(name, direction, ty.base.clone(), ty.dims.clone(), line);
        if direction.is_port() {
            if let Some(existing) = ctx.module.ports.iter_mut().find(|p| p.name == name) {
                self.diags.push(Diagnostic::warning(line, format!("port `{name}` declared twice")));
                if existing.dims.is_empty() && !decl.dims.is_empty() {
                    existing.dims = decl.dims;
                }
                return;
            }
            if !ctx.ansi && !ctx.header_ports.iter().any(|p| p == name) {
                self.warn(line, format!("`{name}` declared as a port but missing from the port list"));
            }
            // A net declared before its direction merges into the port.
            if let Some(idx) = ctx.module.nets.iter().position(|n| n.name == name) {
                let net = ctx.module.nets.remove(idx);
                let mut decl = decl;
                if decl.dims.is_empty() {
                    decl.dims = net.dims;
                    decl.base = net.base;
                }
                ctx.module.ports.push(decl);
            } else {
                ctx.module.ports.push(decl);
            }
            ctx.declared.insert(name.into(), 0);
        } else if let Some(port) = ctx.module.ports.iter_mut().find(|p| p.name == name) {
            // `output q; reg [7:0] q;` merges into the port.
            if port.dims.is_empty() && !decl.dims.is_empty() {
                port.dims = decl.dims;
            }
            if port.base == BaseType::Bit && decl.base != BaseType::Bit {
                port.base = decl.base;
            }
        } else if !ctx.ansi && ctx.header_ports.iter().any(|p| p == name) {
            // Net declaration for a header port whose direction comes later.
            ctx.module.nets.push(decl);
        } else if ctx.declared.contains_key(name) {
            self.warn(line, format!("`{name}` declared twice"));
        } else {
            ctx.declared.insert(name.into(), 0);
            ctx.module.nets.push(decl);
        }
    }

    // ---- module items ----

    /// Parse items until `endmodule`. Returns false if the module never closes.
    fn module_items(&mut self, ctx: &mut ModuleCtx) -> bool {
        loop {
            let Some(t) = self.peek() else {
                ctx.module.end_line = self.line();
                return false;
            };
            if t.is_kw("endmodule") {
                ctx.module.end_line = t.line;
                self.pos += 1;
                self.skip_end_label();
                return true;
            }
            if t.is_kw("module") || t.is_kw("macromodule") {
                ctx.module.end_line = t.line;
                return false;
            }
            let before = self.pos;
            if let Err(e) = self.module_item(ctx) {
                self.diags.push(Diagnostic::warning(e.line, format!("in module `{}`: {}", ctx.module.name, e.message)));
                if self.pos == before {
                    self.pos += 1;
                }
                self.skip_to_semicolon();
            }
        }
    }

    fn module_item(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        let t = self.peek().expect("caller checked");
        let line = t.line;
        if t.is_op(";") {
            self.pos += 1;
            return Ok(());
        }
        if t.kind == TokenKind::Keyword {
            let w = t.text.as_str();
            if let Some(d) = DIRECTIONS.iter().find(|d| **d == w) {
                self.pos += 1;
                let direction = match *d {
                    "input" => Direction::Input,
                    "output" => Direction::Output,
                    _ => Direction::Inout,
                };
                let ty = if self.starts_type() {
                    self.data_type()?
                } else {
                    while self.eat_kw("signed") || self.eat_kw("unsigned") {}
                    TypeSpec { dims: self.packed_dims()?, ..TypeSpec::implicit() }
                };
                return self.declarators(ctx, direction, ty, line);
            }
            if self.starts_type() {
                let ty = self.data_type()?;
                self.record_enum_members(ctx);
                return self.declarators(ctx, Direction::Net, ty, line);
            }
            match w {
                "parameter" | "localparam" => return self.parameter_decl(ctx, w == "localparam"),
                "assign" => return self.continuous_assign(ctx),
                "always" | "always_ff" | "always_comb" | "always_latch" | "initial" | "final" => {
                    self.pos += 1;
                    let mut guards = Vec::new();
                    self.statement(ctx, &mut guards)?;
                    return Ok(());
                }
                "typedef" => return self.typedef(ctx),
                "genvar" | "specparam" | "defparam" | "import" | "export" | "modport" | "bind"
                | "default" | "alias" | "let" | "nettype" | "timeunit" | "timeprecision" => {
                    self.skip_to_semicolon();
                    return Ok(());
                }
                "assert" | "assume" | "cover" | "restrict" => {
                    self.skip_assertion();
                    return Ok(());
                }
                "for" | "if" | "case" => {
                    self.warn(line, "generate construct skipped");
                    self.skip_generate_item();
                    return Ok(());
                }
                "begin" => {
                    self.warn(line, "generate block skipped");
                    self.skip_block();
                    return Ok(());
                }
                _ => {}
            }
            if let Some((start, end)) = SKIPPED_REGIONS.iter().find(|(s, _)| *s == w) {
                self.warn(line, format!("skipped unsupported `{start}` region"));
                self.skip_region(start, end);
                return Ok(());
            }
            if GATES.contains(&w) {
                return self.gate_instance(ctx);
            }
            return self.err(format!("unsupported module item `{w}`"));
        }
        if t.is_ident() {
            let next = self.peek_at(1);
            // label: assert property ...
            if next.is_some_and(|n| n.is_op(":")) {
                self.pos += 2;
                return Ok(());
            }
            if next.is_some_and(|n| n.is_op("#")) || self.is_instantiation() {
                return self.instantiation(ctx);
            }
            if self.starts_type() {
                let ty = self.data_type()?;
                return self.declarators(ctx, Direction::Net, ty, line);
            }
        }
        self.err(format!("unexpected `{}`", t.text))
    }

    /// `ident ident (` or `ident ident [..] (`.
    fn is_instantiation(&self) -> bool {
        if !self.peek_at(1).is_some_and(|t| t.is_ident()) {
            return false;
        }
        let mut i = self.pos + 2;
        let mut depth = 0usize;
        while let Some(t) = self.toks.get(i) {
            if t.is_op("[") {
                depth += 1;
            } else if t.is_op("]") {
                depth = depth.saturating_sub(1);
            } else if depth == 0 {
                return t.is_op("(");
            }
            i += 1;
        }
        false
    }

    fn skip_assertion(&mut self) {
        self.skip_to_semicolon();
        if self.eat_kw("else") {
            if self.at_kw("begin") {
                self.skip_block();
            } else {
                self.skip_to_semicolon();
            }
        }
    }

    /// Bare generate `for`/`if`/`case` at module level.
    fn skip_generate_item(&mut self) {
        let is_case = self.at_kw("case");
        self.pos += 1;
        if self.at_op("(") {
            self.skip_group();
        }
        if is_case {
            self.skip_region("case", "endcase");
            return;
        }
        self.skip_generate_body();
        while self.eat_kw("else") {
            if self.eat_kw("if") && self.at_op("(") {
                self.skip_group();
            }
            self.skip_generate_body();
        }
    }

    fn skip_generate_body(&mut self) {
        if self.at_kw("begin") {
            self.skip_block();
        } else if self.at_kw("if") || self.at_kw("for") || self.at_kw("case") {
            self.skip_generate_item();
        } else {
            self.skip_to_semicolon();
        }
    }

    fn record_enum_members(&mut self, ctx: &mut ModuleCtx) {
        let Some((start, end)) = self.last_enum.take() else { return };
        // tokens between `{` and `}`
        let toks = &self.toks[start + 1..end.saturating_sub(1)];
        let mut next_value: Option<i64> = Some(0);
        let mut i = 0;
        while i < toks.len() {
            let t = &toks[i];
            if t.is_ident() {
                let name = t.text.clone();
                let mut value = next_value.map(|v| Expr::Number { text: v.to_string(), value: Some(v) });
                i += 1;
                if toks.get(i).is_some_and(|t| t.is_op("=")) {
                    i += 1;
                    let lit = toks.get(i).map(|t| t.text.clone()).unwrap_or_default();
                    value = Some(Expr::number(&lit));
                    i += 1;
                }
                let v = value.as_ref().and_then(|e| e.eval_const(&|_| None));
                next_value = v.and_then(|v| v.checked_add(1));
                ctx.module.param_decls.push(ParamDecl { name, value, local: true, line: t.line });
                continue;
            }
            i += 1;
        }
    }

    fn typedef(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        let line = self.line();
        self.pos += 1;
        if self.at_kw("enum") || self.at_kw("struct") || self.at_kw("union") {
            let (base, dims) = self.anonymous_compound()?;
            self.record_enum_members(ctx);
            let name = self.ident()?;
            self.expect_op(";")?;
            ctx.module.typedefs.insert(name, (base, dims));
            return Ok(());
        }
        if self.starts_type() || self.at_kw("logic") || self.at_kw("bit") || self.at_kw("reg") {
            let ty = self.data_type()?;
            let name = self.ident()?;
            self.expect_op(";")?;
            ctx.module.typedefs.insert(name, (ty.base, ty.dims));
            return Ok(());
        }
        self.warn(line, "typedef skipped");
        self.skip_to_semicolon();
        Ok(())
    }

    fn declarators(&mut self, ctx: &mut ModuleCtx, direction: Direction, ty: TypeSpec, line: u32) -> PResult<()> {
        loop {
            let decl_line = self.line();
            let name = self.ident()?;
            while self.at_op("[") {
                self.skip_group();
            }
            self.add_signal(ctx, &name, direction, &ty, decl_line.max(line));
            if self.eat_op("=") {
                let rhs = self.expr()?;
                if ty.net {
                    self.push_assign(ctx, AssignKind::Continuous, &Expr::Ident(name.clone()), &rhs, decl_line, &[]);
                }
            }
            if !self.eat_op(",") {
                return self.expect_op(";");
            }
        }
    }

    fn parameter_decl(&mut self, ctx: &mut ModuleCtx, local: bool) -> PResult<()> {
        self.pos += 1;
        if self.eat_kw("type") {
            self.skip_to_semicolon();
            return Ok(());
        }
        self.skip_param_type();
        loop {
            let line = self.line();
            let name = self.ident()?;
            while self.at_op("[") {
                self.skip_group();
            }
            let value = if self.eat_op("=") { Some(self.expr()?) } else { None };
            ctx.module.param_decls.push(ParamDecl { name, value, local, line });
            if !self.eat_op(",") {
                return self.expect_op(";");
            }
        }
    }

    fn continuous_assign(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        self.pos += 1;
        if self.at_op("(") {
            self.skip_group(); // drive strength
        }
        self.skip_delay();
        loop {
            let line = self.line();
            let lhs = self.lvalue()?;
            self.expect_op("=")?;
            let rhs = self.expr()?;
            self.push_assign(ctx, AssignKind::Continuous, &lhs, &rhs, line, &[]);
            if !self.eat_op(",") {
                return self.expect_op(";");
            }
        }
    }

    fn gate_instance(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        self.pos += 1;
        if self.at_op("(") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Keyword) {
            self.skip_group();
        }
        self.skip_delay();
        loop {
            let line = self.line();
            if self.peek().is_some_and(|t| t.is_ident()) {
                self.pos += 1;
                while self.at_op("[") {
                    self.skip_group();
                }
            }
            self.expect_op("(")?;
            let mut terms = Vec::new();
            loop {
                terms.push(self.expr()?);
                if !self.eat_op(",") {
                    break;
                }
            }
            self.expect_op(")")?;
            if let Some((out, ins)) = terms.split_first() {
                let rhs = Expr::Concat(ins.to_vec());
                self.push_assign(ctx, AssignKind::Continuous, out, &rhs, line, &[]);
            }
            if !self.eat_op(",") {
                return self.expect_op(";");
            }
        }
    }

    fn instantiation(&mut self, ctx: &mut ModuleCtx) -> PResult<()> {
        let target = self.ident()?;
        if self.eat_op("#") {
            if self.at_op("(") {
                self.skip_group();
            } else {
                self.pos += 1;
            }
        }
        loop {
            let line = self.line();
            let instance_name = self.ident()?;
            while self.at_op("[") {
                self.skip_group();
            }
            self.expect_op("(")?;
            let mut inst = Instantiation {
                instance_name,
                target_module: target.clone(),
                connections: Vec::new(),
                wildcard: false,
                line,
            };
            self.connections(&mut inst)?;
            ctx.module.instantiations.push(inst);
            if !self.eat_op(",") {
                return self.expect_op(";");
            }
        }
    }

    fn connections(&mut self, inst: &mut Instantiation) -> PResult<()> {
        if self.eat_op(")") {
            return Ok(());
        }
        let mut named = None;
        let mut index = 0;
        loop {
            let line = self.line();
            if self.eat_op(".*") {
                inst.wildcard = true;
            } else if self.eat_op(".") {
                if named == Some(false) {
                    return self.err("positional and named connections mixed");
                }
                named = Some(true);
                let formal = self.ident()?;
                let actual = if self.eat_op("(") {
                    if self.eat_op(")") {
                        Vec::new()
                    } else {
                        let e = self.expr()?;
                        self.expect_op(")")?;
                        e.identifiers()
                    }
                } else {
                    // `.name` shorthand
                    vec![formal.clone()]
                };
                if inst.connections.iter().any(|c| c.formal == Formal::Named(formal.clone())) {
                    self.warn(line, format!("port `{formal}` connected twice on `{}`", inst.instance_name));
                } else {
                    inst.connections.push(Connection { formal: Formal::Named(formal), actual });
                }
            } else {
                if named == Some(true) {
                    return self.err("positional and named connections mixed");
                }
                named = Some(false);
                if self.at_op(",") || self.at_op(")") {
                    // empty positional slot
                    inst.connections.push(Connection { formal: Formal::Positional(index), actual: Vec::new() });
                } else {
                    let e = self.expr()?;
                    inst.connections.push(Connection { formal: Formal::Positional(index), actual: e.identifiers() });
                }
                index += 1;
            }
            if !self.eat_op(",") {
                return self.expect_op(")");
            }
        }
    }

    // ---- statements ----

    fn push_assign(&mut self, ctx: &mut ModuleCtx, kind: AssignKind, lhs: &Expr, rhs: &Expr, line: u32, guards: &[String]) {
        let (targets, index_reads) = lhs.lvalue_parts();
        let mut st = Statement::assignment(kind, targets, Vec::new(), line);
        st.guard_identifiers = guards.to_vec();
        if rhs.has_ternary() {
            let uses = rhs.split_ternary();
            st.kind = StatementKind::Ternary(kind);
            st.cond_identifiers = uses.conditions;
            st.rhs_identifiers = uses.values;
            st.body_statement_count = uses.arms;
            st.branch_count = uses.arms;
        } else {
            st.rhs_identifiers = rhs.identifiers();
        }
        for id in index_reads {
            if !st.rhs_identifiers.contains(&id) {
                st.rhs_identifiers.push(id);
            }
        }
        ctx.module.statements.push(st);
    }

    /// Parse one procedural statement. Returns the number of statements it
    /// contributes to an enclosing branch: blocks count their members.
    fn statement(&mut self, ctx: &mut ModuleCtx, guards: &mut Vec<String>) -> PResult<usize> {
        let Some(t) = self.peek() else { return self.err("statement expected") };
        let line = t.line;
        if t.is_op(";") {
            self.pos += 1;
            return Ok(0);
        }
        if t.is_op("#") {
            self.skip_delay();
            return self.statement(ctx, guards);
        }
        if t.is_op("@") {
            self.pos += 1;
            if !self.eat_op("*") {
                if self.at_op("(") {
                    self.skip_group();
                } else {
                    self.pos += 1;
                }
            }
            return self.statement(ctx, guards);
        }
        if t.is_op("->") || t.is_op("->>") {
            self.skip_to_semicolon();
            return Ok(1);
        }
        // block label `name: begin`
        if t.is_ident() && self.peek_at(1).is_some_and(|n| n.is_op(":")) && self.peek_at(2).is_some_and(|n| n.kind == TokenKind::Keyword) {
            self.pos += 2;
            return self.statement(ctx, guards);
        }
        if t.kind == TokenKind::Keyword {
            match t.text.as_str() {
                "begin" | "fork" => {
                    self.pos += 1;
                    self.skip_end_label();
                    let mut count = 0;
                    loop {
                        match self.peek() {
                            None => return self.err("unterminated block"),
                            Some(t) if t.is_kw("end") || t.is_kw("join") || t.is_kw("join_any") || t.is_kw("join_none") => {
                                self.pos += 1;
                                self.skip_end_label();
                                return Ok(count);
                            }
                            Some(t) if t.is_kw("endmodule") => return self.err("block not closed before `endmodule`"),
                            Some(_) => count += self.statement(ctx, guards)?,
                        }
                    }
                }
                "unique" | "unique0" | "priority" => {
                    self.pos += 1;
                    return self.statement(ctx, guards);
                }
                "if" => return self.if_statement(ctx, guards),
                "case" | "casez" | "casex" | "randcase" => return self.case_statement(ctx, guards),
                "for" | "while" | "repeat" | "foreach" => {
                    self.pos += 1;
                    if self.at_op("(") {
                        self.skip_group();
                    }
                    self.statement(ctx, guards)?;
                    return Ok(1);
                }
                "forever" => {
                    self.pos += 1;
                    self.statement(ctx, guards)?;
                    return Ok(1);
                }
                "do" => {
                    self.pos += 1;
                    self.statement(ctx, guards)?;
                    if self.eat_kw("while") {
                        self.skip_to_semicolon();
                    }
                    return Ok(1);
                }
                "wait" => {
                    self.pos += 1;
                    if self.at_op("(") {
                        self.skip_group();
                    }
                    return self.statement(ctx, guards);
                }
                "disable" | "return" | "break" | "continue" | "force" | "release" | "assign" | "deassign" => {
                    self.skip_to_semicolon();
                    return Ok(1);
                }
                "assert" | "assume" | "cover" => {
                    self.skip_assertion();
                    return Ok(1);
                }
                _ => {}
            }
            if self.starts_type() {
                // block-local variable
                let ty = self.data_type()?;
                loop {
                    let dl = self.line();
                    let name = self.ident()?;
                    while self.at_op("[") {
                        self.skip_group();
                    }
                    if ctx.module.signal(&name).is_none() {
                        self.add_signal(ctx, &name, Direction::Net, &ty, dl);
                    }
                    if self.eat_op("=") {
                        let rhs = self.expr()?;
                        self.push_assign(ctx, AssignKind::Blocking, &Expr::Ident(name), &rhs, dl, guards);
                    }
                    if !self.eat_op(",") {
                        break;
                    }
                }
                self.expect_op(";")?;
                return Ok(0);
            }
            return self.err(format!("unsupported statement `{}`", t.text));
        }
        if t.kind == TokenKind::SystemIdent {
            self.skip_to_semicolon();
            return Ok(1);
        }
        // assignment or task call
        let lhs = self.lvalue()?;
        let op = self.peek().map(|t| t.text.clone()).unwrap_or_default();
        match op.as_str() {
            "=" | "<=" => {
                self.pos += 1;
                if self.at_op("#") {
                    self.skip_delay();
                } else if self.at_op("@") {
                    self.pos += 1;
                    if self.at_op("(") {
                        self.skip_group();
                    }
                }
                let rhs = self.expr()?;
                self.expect_op(";")?;
                let kind = if op == "=" { AssignKind::Blocking } else { AssignKind::NonBlocking };
                self.push_assign(ctx, kind, &lhs, &rhs, line, guards);
                Ok(1)
            }
            "+=" | "-=" | "*=" | "/=" | "%=" | "&=" | "|=" | "^=" | "<<=" | ">>=" | "<<<=" | ">>>=" => {
                self.pos += 1;
                let rhs = self.expr()?;
                self.expect_op(";")?;
                let both = Expr::Binary(BinaryOp::Other, Box::new(lhs.clone()), Box::new(rhs));
                self.push_assign(ctx, AssignKind::Blocking, &lhs, &both, line, guards);
                Ok(1)
            }
            "++" | "--" => {
                self.pos += 1;
                self.expect_op(";")?;
                self.push_assign(ctx, AssignKind::Blocking, &lhs, &lhs.clone(), line, guards);
                Ok(1)
            }
            "(" | ";" => {
                // task or function call
                self.skip_to_semicolon();
                Ok(1)
            }
            _ => self.err(format!("expected assignment, found `{op}`")),
        }
    }

    fn if_statement(&mut self, ctx: &mut ModuleCtx, guards: &mut Vec<String>) -> PResult<usize> {
        let line = self.line();
        self.pos += 1;
        self.expect_op("(")?;
        let cond = self.expr()?;
        self.expect_op(")")?;
        let ids = cond.identifiers();
        let idx = ctx.module.statements.len();
        ctx.module.statements.push(Statement {
            kind: StatementKind::If,
            cond_identifiers: ids.clone(),
            lhs_identifiers: Vec::new(),
            rhs_identifiers: Vec::new(),
            guard_identifiers: guards.clone(),
            body_statement_count: 0,
            branch_count: 1,
            line,
        });
        let mark = guards.len();
        guards.extend(ids);
        let then_count = self.statement(ctx, guards)?;
        let mut else_count = 0;
        let mut branches = 1;
        if self.eat_kw("else") {
            branches = 2;
            else_count = self.statement(ctx, guards)?;
        }
        guards.truncate(mark);
        let st = &mut ctx.module.statements[idx];
        st.body_statement_count = then_count.max(else_count);
        st.branch_count = branches;
        Ok(1)
    }

    fn case_statement(&mut self, ctx: &mut ModuleCtx, guards: &mut Vec<String>) -> PResult<usize> {
        let line = self.line();
        self.pos += 1;
        self.expect_op("(")?;
        let subject = self.expr()?;
        self.expect_op(")")?;
        let _ = self.eat_kw("inside") || self.eat_kw("matches");
        let mut ids = subject.identifiers();
        let idx = ctx.module.statements.len();
        ctx.module.statements.push(Statement {
            kind: StatementKind::Case,
            cond_identifiers: ids.clone(),
            lhs_identifiers: Vec::new(),
            rhs_identifiers: Vec::new(),
            guard_identifiers: guards.clone(),
            body_statement_count: 0,
            branch_count: 0,
            line,
        });
        let mark = guards.len();
        guards.extend(ids.iter().cloned());
        let mut items = 0;
        let mut widest = 0;
        loop {
            match self.peek() {
                None => return self.err("unterminated case"),
                Some(t) if t.is_kw("endcase") => {
                    self.pos += 1;
                    break;
                }
                Some(t) if t.is_kw("endmodule") => return self.err("case not closed before `endmodule`"),
                Some(t) if t.is_kw("default") => {
                    self.pos += 1;
                    self.eat_op(":");
                }
                Some(_) => loop {
                    let label = if self.at_op("[") {
                        // `inside` range
                        let l = self.line();
                        self.skip_group();
                        let _ = l;
                        None
                    } else {
                        Some(self.expr()?)
                    };
                    if let Some(label) = label {
                        for id in label.identifiers() {
                            if !ids.contains(&id) {
                                ids.push(id.clone());
                                guards.push(id);
                            }
                        }
                    }
                    if !self.eat_op(",") {
                        self.expect_op(":")?;
                        break;
                    }
                },
            }
            items += 1;
            let n = self.statement(ctx, guards)?;
            widest = widest.max(n);
        }
        guards.truncate(mark);
        let st = &mut ctx.module.statements[idx];
        st.cond_identifiers = ids;
        st.body_statement_count = widest;
        st.branch_count = items;
        Ok(1)
    }

    // ---- expressions ----

    /// Assignment target: identifier with selects and members, or a concatenation.
    fn lvalue(&mut self) -> PResult<Expr> {
        if self.at_op("{") {
            self.pos += 1;
            let mut items = Vec::new();
            loop {
                items.push(self.lvalue()?);
                if !self.eat_op(",") {
                    break;
                }
            }
            self.expect_op("}")?;
            return Ok(Expr::Concat(items));
        }
        if self.at_op("'{") {
            self.pos += 1;
            let mut items = Vec::new();
            loop {
                items.push(self.lvalue()?);
                if !self.eat_op(",") {
                    break;
                }
            }
            self.expect_op("}")?;
            return Ok(Expr::Pattern(items));
        }
        let name = self.ident()?;
        self.postfix(Expr::Ident(name))
    }

    fn postfix(&mut self, mut e: Expr) -> PResult<Expr> {
        loop {
            if self.eat_op("[") {
                let first = self.expr()?;
                if self.eat_op(":") || self.eat_op("+:") || self.eat_op("-:") {
                    let second = self.expr()?;
                    self.expect_op("]")?;
                    e = Expr::Slice(Box::new(e), Box::new(first), Box::new(second));
                } else {
                    self.expect_op("]")?;
                    e = Expr::Index(Box::new(e), Box::new(first));
                }
            } else if self.at_op(".") && self.peek_at(1).is_some_and(|t| t.is_ident()) {
                self.pos += 1;
                let member = self.ident()?;
                e = Expr::Member(Box::new(e), member);
            } else {
                return Ok(e);
            }
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.ternary()
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let cond = self.binary(0)?;
        if self.eat_op("?") {
            let a = self.ternary()?;
            self.expect_op(":")?;
            let b = self.ternary()?;
            return Ok(Expr::Ternary(Box::new(cond), Box::new(a), Box::new(b)));
        }
        Ok(cond)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.peek().and_then(binary_op) {
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            if op == BinaryOp::Other && self.at_op("[") {
                // `inside { ... }` set membership handled via the `{` group below
            }
            // `**` is right-associative; the rest are left-associative.
            let next = if op == BinaryOp::Pow { prec } else { prec + 1 };
            let rhs = self.binary(next)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        if self.eat_kw("inside") {
            let rhs = self.primary()?;
            lhs = Expr::Binary(BinaryOp::Other, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let Some(t) = self.peek() else { return self.err("expression expected") };
        if t.kind == TokenKind::Op {
            let op = match t.text.as_str() {
                "+" => Some(UnaryOp::Plus),
                "-" => Some(UnaryOp::Neg),
                "!" => Some(UnaryOp::Not),
                "~" => Some(UnaryOp::BitNot),
                "&" | "|" | "^" | "~&" | "~|" | "~^" | "^~" => Some(UnaryOp::Reduce),
                "++" | "--" => Some(UnaryOp::Plus),
                _ => None,
            };
            if let Some(op) = op {
                self.pos += 1;
                let e = self.unary()?;
                return Ok(Expr::Unary(op, Box::new(e)));
            }
        }
        let e = self.primary()?;
        // `x++` in expressions
        if self.at_op("++") || self.at_op("--") {
            self.pos += 1;
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(t) = self.peek() else { return self.err("expression expected") };
        let e = match t.kind {
            TokenKind::Number => {
                self.pos += 1;
                Expr::number(&t.text)
            }
            TokenKind::Str => {
                self.pos += 1;
                Expr::Str(t.text.clone())
            }
            TokenKind::SystemIdent => {
                self.pos += 1;
                let args = if self.at_op("(") { self.call_args()? } else { Vec::new() };
                Expr::Call(t.text.clone(), args)
            }
            TokenKind::Ident => {
                self.pos += 1;
                if self.eat_op("::") {
                    let mut name = format!("{}::{}", t.text, self.ident()?);
                    while self.eat_op("::") {
                        name = format!("{name}::{}", self.ident()?);
                    }
                    if self.at_op("(") {
                        let args = self.call_args()?;
                        Expr::Call(name, args)
                    } else {
                        Expr::Scoped(name)
                    }
                } else if self.at_op("(") {
                    let args = self.call_args()?;
                    Expr::Call(t.text.clone(), args)
                } else {
                    self.postfix(Expr::Ident(t.text.clone()))?
                }
            }
            TokenKind::Keyword if matches!(t.text.as_str(), "null" | "this" | "super") => {
                self.pos += 1;
                Expr::Number { text: t.text.clone(), value: None }
            }
            TokenKind::Keyword if self.starts_cast_type() => {
                // `signed'(x)`, `logic [3:0]'(x)`
                while self.peek().is_some_and(|t| t.kind == TokenKind::Keyword) {
                    self.pos += 1;
                }
                while self.at_op("[") {
                    self.skip_group();
                }
                return self.cast_tail(Expr::Number { text: String::new(), value: None });
            }
            TokenKind::Op => match t.text.as_str() {
                "(" => {
                    self.pos += 1;
                    let e = self.expr()?;
                    // min:typ:max delays
                    if self.eat_op(":") {
                        let _ = self.expr()?;
                        self.expect_op(":")?;
                        let _ = self.expr()?;
                    }
                    self.expect_op(")")?;
                    self.postfix(e)?
                }
                "{" => {
                    self.pos += 1;
                    self.concat_body()?
                }
                "'{" => {
                    self.pos += 1;
                    let mut items = Vec::new();
                    if !self.at_op("}") {
                        loop {
                            // `'{default: 0}` and `'{a: 1}` keys
                            if (self.at_kw("default") || self.peek().is_some_and(|t| t.is_ident()))
                                && self.peek_at(1).is_some_and(|t| t.is_op(":"))
                            {
                                self.pos += 2;
                            }
                            items.push(self.expr()?);
                            if !self.eat_op(",") {
                                break;
                            }
                        }
                    }
                    self.expect_op("}")?;
                    Expr::Pattern(items)
                }
                "'" => {
                    // '(x) or 'x
                    self.pos += 1;
                    return self.primary();
                }
                _ => return self.err(format!("unexpected `{}` in expression", t.text)),
            },
            _ => return self.err(format!("unexpected `{}` in expression", t.text)),
        };
        if self.at_op("'") && self.peek_at(1).is_some_and(|t| t.is_op("(")) {
            return self.cast_tail(e);
        }
        Ok(e)
    }

    fn starts_cast_type(&self) -> bool {
        let mut i = self.pos;
        while let Some(t) = self.toks.get(i) {
            if t.kind == TokenKind::Keyword
                && (VAR_TYPES.contains(&t.text.as_str())
                    || FIXED_TYPES.iter().any(|(n, _)| *n == t.text)
                    || matches!(t.text.as_str(), "signed" | "unsigned" | "const"))
            {
                i += 1;
                continue;
            }
            return i > self.pos && t.is_op("'");
        }
        false
    }

    fn cast_tail(&mut self, target: Expr) -> PResult<Expr> {
        self.expect_op("'")?;
        self.expect_op("(")?;
        let inner = self.expr()?;
        self.expect_op(")")?;
        Ok(Expr::Cast(Box::new(target), Box::new(inner)))
    }

    fn call_args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_op("(")?;
        let mut args = Vec::new();
        if self.eat_op(")") {
            return Ok(args);
        }
        loop {
            if self.at_op(",") || self.at_op(")") {
                // empty argument
            } else if self.starts_type() || self.at_kw("logic") {
                // $bits(type)
                let _ = self.data_type()?;
            } else {
                args.push(self.expr()?);
            }
            if !self.eat_op(",") {
                self.expect_op(")")?;
                return Ok(args);
            }
        }
    }

    /// After `{`: concatenation, replication `{n{...}}`, or streaming.
    fn concat_body(&mut self) -> PResult<Expr> {
        if self.at_op("<<") || self.at_op(">>") {
            // streaming concatenation {<<{x}} / {>>8{x}}
            self.pos += 1;
            if !self.at_op("{") {
                let _ = self.unary()?;
            }
            self.expect_op("{")?;
            let inner = self.concat_body()?;
            self.expect_op("}")?;
            return Ok(inner);
        }
        if self.eat_op("}") {
            return Ok(Expr::Concat(Vec::new()));
        }
        let first = self.expr()?;
        if self.eat_op("{") {
            let mut items = Vec::new();
            loop {
                items.push(self.expr()?);
                if !self.eat_op(",") {
                    break;
                }
            }
            self.expect_op("}")?;
            self.expect_op("}")?;
            return Ok(Expr::Replicate(Box::new(first), items));
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            items.push(self.expr()?);
        }
        self.expect_op("}")?;
        Ok(Expr::Concat(items))
    }
}

fn binary_op(t: &Token) -> Option<(BinaryOp, u8)> {
    if t.kind != TokenKind::Op {
        return None;
    }
    let r = match t.text.as_str() {
        "||" => (BinaryOp::LogOr, 1),
        "&&" => (BinaryOp::LogAnd, 2),
        "|" => (BinaryOp::BitOr, 3),
        "^" | "~^" | "^~" => (BinaryOp::BitXor, 4),
        "&" => (BinaryOp::BitAnd, 5),
        "==" | "===" | "==?" => (BinaryOp::Eq, 6),
        "!=" | "!==" | "!=?" => (BinaryOp::Ne, 6),
        "<" => (BinaryOp::Lt, 7),
        "<=" => (BinaryOp::Le, 7),
        ">" => (BinaryOp::Gt, 7),
        ">=" => (BinaryOp::Ge, 7),
        "<<" | "<<<" => (BinaryOp::Shl, 8),
        ">>" | ">>>" => (BinaryOp::Shr, 8),
        "+" => (BinaryOp::Add, 9),
        "-" => (BinaryOp::Sub, 9),
        "*" => (BinaryOp::Mul, 10),
        "/" => (BinaryOp::Div, 10),
        "%" => (BinaryOp::Mod, 10),
        "**" => (BinaryOp::Pow, 11),
        "->" | "<->" => (BinaryOp::Other, 0),
        _ => return None,
    };
    Some(r)
}

impl Parser<'_> {
    #[allow(dead_code)]
    fn remaining(&self) -> usize {
        self.toks.len() - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::NoIncludes;

    pub(crate) const SPLITTER: &str = include_str!("../../../fixtures/data_splitter/data_splitter.v");

    fn parse(src: &str) -> SourceUnit {
        parse_source("t.v", src, &NoIncludes)
    }

    fn names(sigs: &[SignalDecl]) -> Vec<&str> {
        sigs.iter().map(|s| s.name.as_str()).collect()
    }

    #[test]
    fn data_splitter_structure() {
        let unit = parse(SPLITTER);
        assert!(unit.diagnostics.is_empty(), "{:?}", unit.diagnostics);
        assert_eq!(unit.modules.len(), 1);
        let m = &unit.modules[0];
        assert_eq!(m.name, "data_splitter");
        assert_eq!(
            names(&m.ports),
            ["clk", "load", "bank_selector", "data", "bank0", "bank1", "bank2", "bank3", "done"]
        );
        assert_eq!(names(&m.nets), ["data_in_reg", "done0", "done1", "done2", "done3"]);
        assert_eq!(m.start_line, 1);
        assert_eq!(m.end_line, 44);

        let ifs: Vec<_> = m.statements.iter().filter(|s| s.kind == StatementKind::If).collect();
        assert_eq!(ifs.len(), 2);
        assert_eq!(ifs[0].cond_identifiers, ["load"]);
        assert_eq!(ifs[0].branch_count, 1);
        assert_eq!(ifs[1].cond_identifiers, ["done0", "done1", "done2", "done3"]);
        assert_eq!(ifs[1].branch_count, 2);
        assert_eq!(ifs[1].body_statement_count, 1);

        let cases: Vec<_> = m.statements.iter().filter(|s| s.kind == StatementKind::Case).collect();
        assert_eq!(cases.len(), 1);
        assert_eq!(cases[0].cond_identifiers, ["bank_selector"]);
        assert_eq!(cases[0].branch_count, 5);
        assert_eq!(cases[0].body_statement_count, 2);

        let guarded = &m.statements[1];
        assert_eq!(guarded.kind, StatementKind::Assign(AssignKind::NonBlocking));
        assert_eq!(guarded.lhs_identifiers, ["data_in_reg"]);
        assert_eq!(guarded.rhs_identifiers, ["data"]);
        assert_eq!(guarded.guard_identifiers, ["load"]);
        assert_eq!(guarded.line, 15);
        assert!(m.unresolved_refs.is_empty());
    }

    #[test]
    fn comment_only_file() {
        let unit = parse("// nothing here\n/* or here */\n");
        assert!(unit.modules.is_empty());
        assert!(unit.diagnostics.is_empty());
    }

    #[test]
    fn two_modules_with_instantiation() {
        let src = "module a(input din, output dout);\n  assign dout = din;\nendmodule\n\
                   module b(input top_in, output top_out);\n  a u0 (.din(top_in), .dout(top_out));\nendmodule\n";
        let unit = parse(src);
        assert_eq!(unit.modules.len(), 2);
        let b = &unit.modules[1];
        assert_eq!(b.instantiations.len(), 1);
        assert_eq!(b.instantiations[0].target_module, "a");
        assert_eq!(b.instantiations[0].instance_name, "u0");
        assert_eq!(
            b.instantiations[0].connections[0],
            Connection { formal: Formal::Named("din".into()), actual: vec!["top_in".into()] }
        );
    }

    #[test]
    fn non_ansi_ports_merge_with_net_declarations() {
        let src = "module m(a, b, q);\n input [3:0] a;\n input b;\n output q;\n reg [7:0] q;\n wire w;\nendmodule";
        let m = &parse(src).modules[0];
        assert_eq!(names(&m.ports), ["a", "b", "q"]);
        assert_eq!(names(&m.nets), ["w"]);
        assert_eq!(m.ports[2].width, Width::Bits(8));
        assert_eq!(m.ports[2].direction, Direction::Output);
    }

    #[test]
    fn malformed_module_recovers_at_next_module() {
        let src = "module bad(input a\nwire x;\nendmodule\nmodule good(input a);\nendmodule\n";
        let unit = parse(src);
        assert_eq!(unit.modules.len(), 1);
        assert_eq!(unit.modules[0].name, "good");
        assert!(!unit.diagnostics.is_empty());
    }

    #[test]
    fn bad_item_does_not_lose_the_rest() {
        let src = "module m(input a, output y);\n  wire w;\n  @@@ ;\n  assign y = a;\nendmodule";
        let unit = parse(src);
        assert_eq!(unit.modules[0].statements.len(), 1);
        assert_eq!(unit.diagnostics.len(), 1);
    }

    #[test]
    fn unsupported_constructs_are_skipped_with_diagnostics() {
        let src = "module m(input [3:0] a, output y);\n\
                   function f; input x; f = x; endfunction\n\
                   generate for (genvar i = 0; i < 4; i++) begin : g wire t; end endgenerate\n\
                   task t; begin end endtask\n\
                   assert property (@(posedge a) a) else $error(\"x\");\n\
                   for (genvar j = 0; j < 2; j++) begin : h assign y = a[j]; end\n\
                   assign y = a[0];\nendmodule";
        let unit = parse(src);
        let m = &unit.modules[0];
        assert_eq!(m.statements.len(), 1);
        assert!(unit.diagnostics.len() >= 4);
        assert!(m.nets.is_empty());
    }

    #[test]
    fn ternary_bearing_statement() {
        let src = "module m(input sel, input [7:0] a, b, output [7:0] y);\n assign y = sel ? a : b;\nendmodule";
        let m = &parse(src).modules[0];
        let st = &m.statements[0];
        assert_eq!(st.kind, StatementKind::Ternary(AssignKind::Continuous));
        assert_eq!(st.cond_identifiers, ["sel"]);
        assert_eq!(st.rhs_identifiers, ["a", "b"]);
        assert_eq!(st.body_statement_count, 2);
        // ANSI inheritance: b shares a's declaration
        assert_eq!(m.port("b").unwrap().width, Width::Bits(8));
    }

    #[test]
    fn positional_connections_and_gates() {
        let src = "module m(input a, b, output y);\n  wire t;\n  and g1 (t, a, b);\n  sub u (t, , y);\nendmodule";
        let m = &parse(src).modules[0];
        assert_eq!(m.statements[0].lhs_identifiers, ["t"]);
        assert_eq!(m.statements[0].rhs_identifiers, ["a", "b"]);
        let inst = &m.instantiations[0];
        assert_eq!(inst.connections.len(), 3);
        assert_eq!(inst.connections[1].actual, Vec::<String>::new());
        assert_eq!(inst.connections[2].formal, Formal::Positional(2));
    }

    #[test]
    fn mixed_connections_are_rejected() {
        let src = "module m(input a);\n  sub u (.x(a), a);\nendmodule";
        let unit = parse(src);
        assert!(unit.modules[0].instantiations.is_empty());
        assert_eq!(unit.diagnostics.len(), 1);
    }

    #[test]
    fn systemverilog_items() {
        let src = "module m #(parameter int W = 4) (input logic clk_i, input logic [W-1:0] d, output logic [W-1:0] q);\n\
                   typedef enum logic [1:0] {IDLE, RUN, DONE} state_t;\n\
                   state_t state;\n\
                   always_ff @(posedge clk_i) begin\n\
                     unique case (state)\n\
                       IDLE: state <= RUN;\n\
                       default: q <= d;\n\
                     endcase\n\
                   end\n\
                   endmodule";
        let unit = parse(src);
        assert!(unit.diagnostics.is_empty(), "{:?}", unit.diagnostics);
        let m = &unit.modules[0];
        assert_eq!(m.signal("state").unwrap().width, Width::Bits(2));
        assert_eq!(m.port("q").unwrap().width, Width::Bits(4));
        assert_eq!(m.parameters.get("DONE"), Some(&ParamValue::Int(2)));
        assert!(m.unresolved_refs.is_empty(), "{:?}", m.unresolved_refs);
    }

    #[test]
    fn reparse_is_deterministic() {
        assert_eq!(parse(SPLITTER), parse(SPLITTER));
    }
}
