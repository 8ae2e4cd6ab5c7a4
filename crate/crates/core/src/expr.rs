// SPDX-License-Identifier: Apache-2.0

//! Expression trees, identifier collection and constant folding.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Plus,
    Neg,
    Not,
    BitNot,
    /// `&x`, `|x`, `^x` and their negations.
    Reduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitOr,
    BitXor,
    LogAnd,
    LogOr,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Ident(String),
    /// `pkg::NAME`; a constant from outside the module.
    Scoped(String),
    Number { text: String, value: Option<i64> },
    Str(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ternary(Box<Expr>, Box<Expr>, Box<Expr>),
    Concat(Vec<Expr>),
    Replicate(Box<Expr>, Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Slice(Box<Expr>, Box<Expr>, Box<Expr>),
    Member(Box<Expr>, String),
    Call(String, Vec<Expr>),
    Cast(Box<Expr>, Box<Expr>),
    Pattern(Vec<Expr>),
}

impl Expr {
    pub fn number(text: &str) -> Self {
        Expr::Number { text: text.into(), value: parse_number(text) }
    }

    /// Identifiers that name signals or parameters, in first-use order.
    pub fn identifiers(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect(&mut out, &mut None);
        out
    }

    /// Split identifiers into ternary-condition uses and value uses.
    pub fn split_ternary(&self) -> TernaryUses {
        let mut values = Vec::new();
        let mut conds = Vec::new();
        self.collect(&mut values, &mut Some(&mut conds));
        TernaryUses { conditions: conds, values, arms: self.max_arms() }
    }

    pub fn has_ternary(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Ternary(..)));
        found
    }

    /// Largest number of selectable values among the ternary chains in this tree.
    fn max_arms(&self) -> usize {
        let mut best = 0;
        self.walk(&mut |e| {
            if let Expr::Ternary(..) = e {
                best = best.max(e.chain_leaves());
            }
        });
        best
    }

    fn chain_leaves(&self) -> usize {
        match self {
            Expr::Ternary(_, a, b) => a.chain_leaves() + b.chain_leaves(),
            _ => 1,
        }
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut dyn FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Ident(_) | Expr::Scoped(_) | Expr::Number { .. } | Expr::Str(_) => {}
            Expr::Unary(_, e) | Expr::Member(e, _) => e.walk(f),
            Expr::Binary(_, a, b) | Expr::Index(a, b) | Expr::Cast(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Ternary(c, a, b) | Expr::Slice(c, a, b) => {
                c.walk(f);
                a.walk(f);
                b.walk(f);
            }
            Expr::Concat(items) | Expr::Call(_, items) | Expr::Pattern(items) => {
                items.iter().for_each(|e| e.walk(f));
            }
            Expr::Replicate(n, items) => {
                n.walk(f);
                items.iter().for_each(|e| e.walk(f));
            }
        }
    }

    fn collect(&self, out: &mut Vec<String>, conds: &mut Option<&mut Vec<String>>) {
        match self {
            Expr::Ident(name) => push_unique(out, name),
            Expr::Scoped(_) | Expr::Number { .. } | Expr::Str(_) => {}
            Expr::Unary(_, e) => e.collect(out, conds),
            Expr::Member(base, _) => base.collect(out, conds),
            Expr::Binary(_, a, b) | Expr::Index(a, b) => {
                a.collect(out, conds);
                b.collect(out, conds);
            }
            // The cast target is a type or width, not a signal.
            Expr::Cast(_, inner) => inner.collect(out, conds),
            Expr::Ternary(c, a, b) => {
                match conds {
                    Some(cs) => c.collect(cs, &mut None),
                    None => c.collect(out, conds),
                }
                a.collect(out, conds);
                b.collect(out, conds);
            }
            Expr::Slice(base, m, l) => {
                base.collect(out, conds);
                m.collect(out, conds);
                l.collect(out, conds);
            }
            Expr::Concat(items) | Expr::Call(_, items) | Expr::Pattern(items) => {
                items.iter().for_each(|e| e.collect(out, conds));
            }
            Expr::Replicate(n, items) => {
                n.collect(out, conds);
                items.iter().for_each(|e| e.collect(out, conds));
            }
        }
    }

    /// Base signal names written by this expression in an lvalue position,
    /// and the identifiers read by its index expressions.
    pub fn lvalue_parts(&self) -> (Vec<String>, Vec<String>) {
        let mut targets = Vec::new();
        let mut reads = Vec::new();
        self.lvalue_into(&mut targets, &mut reads);
        (targets, reads)
    }

    fn lvalue_into(&self, targets: &mut Vec<String>, reads: &mut Vec<String>) {
        match self {
            Expr::Ident(name) => push_unique(targets, name),
            Expr::Member(base, _) => base.lvalue_into(targets, reads),
            Expr::Index(base, idx) => {
                base.lvalue_into(targets, reads);
                for id in idx.identifiers() {
                    push_unique(reads, &id);
                }
            }
            Expr::Slice(base, m, l) => {
                base.lvalue_into(targets, reads);
                for id in m.identifiers().into_iter().chain(l.identifiers()) {
                    push_unique(reads, &id);
                }
            }
            Expr::Concat(items) | Expr::Pattern(items) => {
                items.iter().for_each(|e| e.lvalue_into(targets, reads));
            }
            _ => {}
        }
    }

    /// Fold a constant integer expression. `lookup` resolves parameter names.
    pub fn eval_const(&self, lookup: &dyn Fn(&str) -> Option<i64>) -> Option<i64> {
        match self {
            Expr::Number { value, .. } => *value,
            Expr::Ident(name) => lookup(name),
            Expr::Unary(UnaryOp::Plus, e) => e.eval_const(lookup),
            Expr::Unary(UnaryOp::Neg, e) => e.eval_const(lookup)?.checked_neg(),
            Expr::Unary(UnaryOp::Not, e) => Some((e.eval_const(lookup)? == 0) as i64),
            Expr::Binary(op, a, b) => {
                let a = a.eval_const(lookup)?;
                let b = b.eval_const(lookup)?;
                match op {
                    BinaryOp::Add => a.checked_add(b),
                    BinaryOp::Sub => a.checked_sub(b),
                    BinaryOp::Mul => a.checked_mul(b),
                    BinaryOp::Div => a.checked_div(b),
                    BinaryOp::Mod => a.checked_rem(b),
                    BinaryOp::Pow => u32::try_from(b).ok().and_then(|b| a.checked_pow(b)),
                    BinaryOp::Shl => u32::try_from(b).ok().and_then(|b| a.checked_shl(b)),
                    BinaryOp::Shr => u32::try_from(b).ok().and_then(|b| a.checked_shr(b)),
                    BinaryOp::Lt => Some((a < b) as i64),
                    BinaryOp::Le => Some((a <= b) as i64),
                    BinaryOp::Gt => Some((a > b) as i64),
                    BinaryOp::Ge => Some((a >= b) as i64),
                    BinaryOp::Eq => Some((a == b) as i64),
                    BinaryOp::Ne => Some((a != b) as i64),
                    _ => None,
                }
            }
            Expr::Ternary(c, a, b) => {
                if c.eval_const(lookup)? != 0 {
                    a.eval_const(lookup)
                } else {
                    b.eval_const(lookup)
                }
            }
            Expr::Call(name, args) if name == "$clog2" && args.len() == 1 => {
                let v = args[0].eval_const(lookup)?;
                Some(clog2(v))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TernaryUses {
    pub conditions: Vec<String>,
    pub values: Vec<String>,
    /// Leaf count of the widest ternary chain; 0 when there is no ternary.
    pub arms: usize,
}

fn push_unique(out: &mut Vec<String>, name: &str) {
    if !out.iter().any(|n| n == name) {
        out.push(name.into());
    }
}

fn clog2(v: i64) -> i64 {
    if v <= 1 {
        return 0;
    }
    let mut bits = 0;
    let mut n = v - 1;
    while n > 0 {
        bits += 1;
        n >>= 1;
    }
    bits
}

/// Value of an integer literal such as `42`, `8'hFF`, `'d10` or `1_000`.
/// Literals containing x/z digits, reals, and fill literals yield `None`.
pub fn parse_number(text: &str) -> Option<i64> {
    let clean: String = text.chars().filter(|c| *c != '_' && !c.is_whitespace()).collect();
    match clean.find('\'') {
        None => clean.parse::<i64>().ok(),
        Some(q) => {
            let mut rest = &clean[q + 1..];
            if rest.starts_with(['s', 'S']) {
                rest = &rest[1..];
            }
            let mut chars = rest.chars();
            let radix = match chars.next()?.to_ascii_lowercase() {
                'b' => 2,
                'o' => 8,
                'd' => 10,
                'h' => 16,
                _ => return None,
            };
            let digits = chars.as_str();
            if digits.is_empty() {
                return None;
            }
            u64::from_str_radix(digits, radix).ok().and_then(|v| i64::try_from(v).ok())
        }
    }
}
