// SPDX-License-Identifier: Apache-2.0

//! Parsed representation of RTL source files.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn new(severity: Severity, line: u32, message: impl Into<String>) -> Self {
        Self { severity, line, message: message.into() }
    }

    pub fn warning(line: u32, message: impl Into<String>) -> Self {
        Self::new(Severity::Warning, line, message)
    }

    pub fn error(line: u32, message: impl Into<String>) -> Self {
        Self::new(Severity::Error, line, message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Input,
    Output,
    Inout,
    Net,
}

impl Direction {
    pub fn is_port(self) -> bool {
        self != Direction::Net
    }

    /// Inout ports act as both inputs and outputs.
    pub fn acts_as_input(self) -> bool {
        matches!(self, Direction::Input | Direction::Inout)
    }

    pub fn acts_as_output(self) -> bool {
        matches!(self, Direction::Output | Direction::Inout)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Input => "input",
            Direction::Output => "output",
            Direction::Inout => "inout",
            Direction::Net => "net",
        }
    }
}

/// Serialized as the bit count, or the string `"unresolved"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Width {
    Bits(u32),
    Unresolved,
}

impl Width {
    pub fn bits(self) -> Option<u32> {
        match self {
            Width::Bits(b) => Some(b),
            Width::Unresolved => None,
        }
    }

    pub fn class(self) -> WidthClass {
        match self {
            Width::Bits(1) => WidthClass::Single,
            Width::Bits(2..=8) => WidthClass::Narrow,
            Width::Bits(_) => WidthClass::Wide,
            // Parameterized buses are taken to be a few bits wide.
            Width::Unresolved => WidthClass::Narrow,
        }
    }

    /// Width gate used by the multi-bit behavioral branches.
    pub fn is_multi_bit(self) -> bool {
        !matches!(self, Width::Bits(0 | 1))
    }
}

impl Serialize for Width {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Width::Bits(b) => s.serialize_u32(*b),
            Width::Unresolved => s.serialize_str("unresolved"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidthClass {
    Single,
    Narrow,
    Wide,
}

/// One packed dimension as written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PackedDim {
    Range(Expr, Expr),
    Size(Expr),
}

/// The declared data type underlying a signal's packed dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseType {
    /// wire, reg, logic, bit and friends: one bit per element.
    Bit,
    /// integer, int, byte, ...: a fixed width.
    Fixed(u32),
    /// A typedef name; resolved against the module's typedefs.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalDecl {
    pub name: String,
    pub direction: Direction,
    pub width: Width,
    pub width_class: WidthClass,
    pub decl_line: u32,
    pub base: BaseType,
    pub dims: Vec<PackedDim>,
}

impl SignalDecl {
    pub fn new(name: impl Into<String>, direction: Direction, base: BaseType, dims: Vec<PackedDim>, line: u32) -> Self {
        Self {
            name: name.into(),
            direction,
            width: Width::Unresolved,
            width_class: WidthClass::Narrow,
            decl_line: line,
            base,
            dims,
        }
    }

    pub fn width_bits(&self) -> Option<u32> {
        self.width.bits()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AssignKind {
    Continuous,
    Blocking,
    NonBlocking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StatementKind {
    Assign(AssignKind),
    If,
    Case,
    /// An assignment whose right-hand side contains `?:`.
    Ternary(AssignKind),
}

impl StatementKind {
    pub fn assign_kind(self) -> Option<AssignKind> {
        match self {
            StatementKind::Assign(k) | StatementKind::Ternary(k) => Some(k),
            _ => None,
        }
    }

    pub fn is_conditional(self) -> bool {
        !matches!(self, StatementKind::Assign(_))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StatementKind::Assign(AssignKind::Continuous) => "continuous_assign",
            StatementKind::Assign(AssignKind::Blocking) => "blocking_assign",
            StatementKind::Assign(AssignKind::NonBlocking) => "nonblocking_assign",
            StatementKind::If => "if",
            StatementKind::Case => "case",
            StatementKind::Ternary(_) => "ternary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub kind: StatementKind,
    pub cond_identifiers: Vec<String>,
    pub lhs_identifiers: Vec<String>,
    pub rhs_identifiers: Vec<String>,
    /// Conditions of every enclosing `if`/`case`, outermost first.
    pub guard_identifiers: Vec<String>,
    /// Largest number of statements in any one branch. For a ternary, the
    /// number of selectable values.
    pub body_statement_count: usize,
    /// Branches written: then/else for `if`, items (including `default`) for `case`.
    pub branch_count: usize,
    pub line: u32,
}

impl Statement {
    pub fn assignment(kind: AssignKind, lhs: Vec<String>, rhs: Vec<String>, line: u32) -> Self {
        Self {
            kind: StatementKind::Assign(kind),
            cond_identifiers: Vec::new(),
            lhs_identifiers: lhs,
            rhs_identifiers: rhs,
            guard_identifiers: Vec::new(),
            body_statement_count: 0,
            branch_count: 0,
            line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Formal {
    Named(String),
    Positional(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connection {
    pub formal: Formal,
    pub actual: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instantiation {
    pub instance_name: String,
    pub target_module: String,
    pub connections: Vec<Connection>,
    /// `.*` present: every same-named signal is connected.
    pub wildcard: bool,
    pub line: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamValue {
    Int(i64),
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub value: Option<Expr>,
    pub local: bool,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnresolvedRef {
    pub name: String,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleDef {
    pub name: String,
    pub file: String,
    pub start_line: u32,
    pub end_line: u32,
    pub ports: Vec<SignalDecl>,
    pub nets: Vec<SignalDecl>,
    pub param_decls: Vec<ParamDecl>,
    pub parameters: BTreeMap<String, ParamValue>,
    /// Width of each typedef declared in the module, as a packed type.
    pub typedefs: BTreeMap<String, (BaseType, Vec<PackedDim>)>,
    pub statements: Vec<Statement>,
    pub instantiations: Vec<Instantiation>,
    pub unresolved_refs: Vec<UnresolvedRef>,
}

impl ModuleDef {
    pub fn new(name: impl Into<String>, file: impl Into<String>, line: u32) -> Self {
        Self {
            name: name.into(),
            file: file.into(),
            start_line: line,
            end_line: line,
            ports: Vec::new(),
            nets: Vec::new(),
            param_decls: Vec::new(),
            parameters: BTreeMap::new(),
            typedefs: BTreeMap::new(),
            statements: Vec::new(),
            instantiations: Vec::new(),
            unresolved_refs: Vec::new(),
        }
    }

    pub fn signal(&self, name: &str) -> Option<&SignalDecl> {
        self.ports.iter().chain(&self.nets).find(|s| s.name == name)
    }

    pub fn port(&self, name: &str) -> Option<&SignalDecl> {
        self.ports.iter().find(|s| s.name == name)
    }

    pub fn signals(&self) -> impl Iterator<Item = &SignalDecl> {
        self.ports.iter().chain(&self.nets)
    }

    pub fn is_parameter(&self, name: &str) -> bool {
        self.parameters.contains_key(name) || self.param_decls.iter().any(|p| p.name == name)
    }

    /// Recompute `unresolved_refs` from the statements and instantiations.
    pub fn collect_unresolved(&mut self) {
        let mut refs = Vec::new();
        let mut seen = alloc::collections::BTreeSet::new();
        let mut check = |name: &str, line: u32, refs: &mut Vec<UnresolvedRef>| {
            if self.signal(name).is_none() && !self.is_parameter(name) && seen.insert(String::from(name)) {
                refs.push(UnresolvedRef { name: name.into(), line });
            }
        };
        for st in &self.statements {
            for id in st.cond_identifiers.iter().chain(&st.lhs_identifiers).chain(&st.rhs_identifiers) {
                check(id, st.line, &mut refs);
            }
        }
        for inst in &self.instantiations {
            for c in &inst.connections {
                for id in &c.actual {
                    check(id, inst.line, &mut refs);
                }
            }
        }
        self.unresolved_refs = refs;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: String,
    pub modules: Vec<ModuleDef>,
    pub diagnostics: Vec<Diagnostic>,
    pub line_count: usize,
}
