// SPDX-License-Identifier: Apache-2.0

//! Behavioral pattern detection from syntactic usage.
//!
//! Each statement is visited in source order. Identifiers used in an `if`,
//! `case` or `?:` condition become Control when 1-bit or Configuration when
//! wider and the conditional carries multiple statements; only inputs and
//! nets qualify. Assignment targets that are outputs become Status (1-bit) or
//! Data (wider), and wide inputs read on a right-hand side become Data. The
//! condition and assignment checks apply independently, so a guarded
//! assignment can contribute to both.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ast::{ModuleDef, SignalDecl, Statement, StatementKind, Width};
use crate::design::DesignDatabase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Behavior {
    Control,
    Configuration,
    Status,
    Data,
}

impl Behavior {
    pub const ALL: [Behavior; 4] = [Behavior::Control, Behavior::Configuration, Behavior::Status, Behavior::Data];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Condition,
    Lhs,
    Rhs,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Evidence {
    pub line: u32,
    pub statement_kind: &'static str,
    pub role: Role,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BehaviorClassification {
    pub module: String,
    pub control_signals: BTreeSet<String>,
    pub configuration_signals: BTreeSet<String>,
    pub status_signals: BTreeSet<String>,
    pub data_signals: BTreeSet<String>,
    pub evidence: BTreeMap<String, Vec<Evidence>>,
    /// Identifiers that resolved to neither a signal nor a parameter.
    pub unresolved: usize,
}

impl BehaviorClassification {
    fn set_mut(&mut self, b: Behavior) -> &mut BTreeSet<String> {
        match b {
            Behavior::Control => &mut self.control_signals,
            Behavior::Configuration => &mut self.configuration_signals,
            Behavior::Status => &mut self.status_signals,
            Behavior::Data => &mut self.data_signals,
        }
    }

    pub fn set(&self, b: Behavior) -> &BTreeSet<String> {
        match b {
            Behavior::Control => &self.control_signals,
            Behavior::Configuration => &self.configuration_signals,
            Behavior::Status => &self.status_signals,
            Behavior::Data => &self.data_signals,
        }
    }

    /// Every pattern `name` holds in this module.
    pub fn patterns_of(&self, name: &str) -> BTreeSet<Behavior> {
        Behavior::ALL.into_iter().filter(|b| self.set(*b).contains(name)).collect()
    }

    fn add(&mut self, name: &str, b: Behavior, st: &Statement, role: Role) {
        self.set_mut(b).insert(name.into());
        let ev = Evidence { line: st.line, statement_kind: st.kind.as_str(), role, behavior: b };
        let list = self.evidence.entry(name.into()).or_default();
        if !list.contains(&ev) {
            list.push(ev);
        }
    }
}

/// The guard on the Configuration branch: `case` always qualifies; `if` and
/// `?:` qualify when some branch holds two or more statements or values.
pub fn has_multiple_statements(st: &Statement) -> bool {
    match st.kind {
        StatementKind::Case => true,
        StatementKind::If | StatementKind::Ternary(_) => st.body_statement_count >= 2,
        StatementKind::Assign(_) => false,
    }
}

fn is_single(sig: &SignalDecl) -> bool {
    sig.width == Width::Bits(1)
}

fn is_wide(sig: &SignalDecl) -> bool {
    sig.width.is_multi_bit()
}

pub fn classify_behaviors(module: &ModuleDef) -> BehaviorClassification {
    let mut out = BehaviorClassification { module: module.name.clone(), ..Default::default() };
    let lookup = |id: &str, unresolved: &mut usize| -> Option<&SignalDecl> {
        let sig = module.signal(id);
        if sig.is_none() && !module.is_parameter(id) {
            *unresolved += 1;
        }
        sig
    };
    let mut unresolved = 0;
    for st in &module.statements {
        if st.kind.is_conditional() {
            for x in &st.cond_identifiers {
                let Some(sig) = lookup(x, &mut unresolved) else { continue };
                if !sig.direction.acts_as_input() && sig.direction.is_port() {
                    continue;
                }
                if is_single(sig) {
                    out.add(x, Behavior::Control, st, Role::Condition);
                } else if is_wide(sig) && has_multiple_statements(st) {
                    out.add(x, Behavior::Configuration, st, Role::Condition);
                }
            }
        }
        if st.kind.assign_kind().is_some() {
            for l in &st.lhs_identifiers {
                let Some(sig) = lookup(l, &mut unresolved) else { continue };
                if !sig.direction.acts_as_output() {
                    continue;
                }
                if is_single(sig) {
                    out.add(l, Behavior::Status, st, Role::Lhs);
                } else if is_wide(sig) {
                    out.add(l, Behavior::Data, st, Role::Lhs);
                }
            }
            for r in &st.rhs_identifiers {
                let Some(sig) = lookup(r, &mut unresolved) else { continue };
                if sig.direction.acts_as_input() && is_wide(sig) {
                    out.add(r, Behavior::Data, st, Role::Rhs);
                }
            }
        }
    }
    out.unresolved = unresolved;
    out
}

pub fn classify_design(db: &DesignDatabase) -> BTreeMap<String, BehaviorClassification> {
    db.modules_by_name.iter().map(|(n, m)| (n.clone(), classify_behaviors(m))).collect()
}
