// SPDX-License-Identifier: Apache-2.0

//! IP-family classification rules joining keyword groups, patterns,
//! directions and widths into candidate assets.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ast::{Direction, Width};
use crate::classify::{Behavior, BehaviorClassification, Evidence};
use crate::config::{ConfigError, FamilyConfig, Objective};
use crate::design::SignalRef;
use crate::matcher::{GroupMatch, ImportantElement};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRule {
    pub name: String,
    /// Any of these groups.
    pub require_groups: Vec<String>,
    /// Any of these patterns.
    pub require_patterns: BTreeSet<Behavior>,
    pub require_directions: BTreeSet<Direction>,
    pub min_width_bits: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_width_bits: Option<u32>,
    pub assign_objectives: BTreeSet<Objective>,
}

impl ClassificationRule {
    pub fn direction_ok(&self, d: Direction) -> bool {
        match d {
            Direction::Inout => {
                self.require_directions.contains(&Direction::Inout)
                    || self.require_directions.contains(&Direction::Input)
                    || self.require_directions.contains(&Direction::Output)
            }
            d => self.require_directions.contains(&d),
        }
    }

    /// Unresolved widths are treated as a few bits: they pass when the bounds admit 2..=8.
    pub fn width_ok(&self, w: Width) -> bool {
        let max = self.max_width_bits.unwrap_or(u32::MAX);
        match w {
            Width::Bits(b) => self.min_width_bits <= b && b <= max,
            Width::Unresolved => self.min_width_bits <= 8 && max >= 2,
        }
    }

    pub fn groups_ok(&self, matched: &[GroupMatch]) -> bool {
        matched.iter().any(|m| self.require_groups.contains(&m.group))
    }

    pub fn patterns_ok(&self, patterns: &BTreeSet<Behavior>) -> bool {
        !self.require_patterns.is_disjoint(patterns)
    }

    pub fn accepts(&self, el: &ImportantElement, patterns: &BTreeSet<Behavior>) -> bool {
        self.groups_ok(&el.matched_groups) && self.patterns_ok(patterns) && self.direction_ok(el.direction) && self.width_ok(el.width)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateAsset {
    pub signal: SignalRef,
    pub direction: Direction,
    pub width: Width,
    pub matched_rule: String,
    pub patterns: BTreeSet<Behavior>,
    pub objectives: BTreeSet<Objective>,
    pub matched_groups: Vec<GroupMatch>,
    pub evidence: Vec<Evidence>,
}

/// Keep the important elements that satisfy a rule. The first satisfied rule
/// is recorded; each element yields at most one candidate.
pub fn apply_family_rules(
    important: &[ImportantElement],
    behaviors: &BTreeMap<String, BehaviorClassification>,
    config: &FamilyConfig,
    rules: &[ClassificationRule],
) -> Result<Vec<CandidateAsset>, ConfigError> {
    if rules.is_empty() {
        return Err(ConfigError::NoRules);
    }
    let mut out = Vec::new();
    for el in important {
        let Some(bc) = behaviors.get(&el.signal.module) else { continue };
        let patterns = bc.patterns_of(&el.signal.name);
        if patterns.is_empty() {
            continue;
        }
        let Some(rule) = rules.iter().find(|r| r.accepts(el, &patterns)) else { continue };
        let mut objectives = rule.assign_objectives.clone();
        for m in &el.matched_groups {
            if let Some(g) = config.group(&m.group) {
                objectives.extend(g.objectives.iter().copied());
            }
        }
        out.push(CandidateAsset {
            signal: el.signal.clone(),
            direction: el.direction,
            width: el.width,
            matched_rule: rule.name.clone(),
            patterns,
            objectives,
            matched_groups: el.matched_groups.clone(),
            evidence: bc.evidence.get(&el.signal.name).cloned().unwrap_or_default(),
        });
    }
    Ok(out)
}

struct R<'a> {
    name: &'a str,
    groups: &'a [&'a str],
    patterns: &'a [Behavior],
    directions: &'a [Direction],
    min: u32,
    max: Option<u32>,
    objectives: &'a [Objective],
}

impl R<'_> {
    fn build(self) -> ClassificationRule {
        ClassificationRule {
            name: self.name.into(),
            require_groups: self.groups.iter().map(|s| s.to_string()).collect(),
            require_patterns: self.patterns.iter().copied().collect(),
            require_directions: self.directions.iter().copied().collect(),
            min_width_bits: self.min,
            max_width_bits: self.max,
            assign_objectives: self.objectives.iter().copied().collect(),
        }
    }
}

use Behavior::{Configuration as Cfg, Control as Ctl, Data as Dat, Status as Sts};
use Direction::{Inout, Input, Net, Output};
use Objective::{Availability as A, Confidentiality as C, Integrity as I};

const ANY_DIR: &[Direction] = &[Input, Output, Inout, Net];
const IN_NET: &[Direction] = &[Input, Inout, Net];
const OUT: &[Direction] = &[Output, Inout];

/// Bundled ordered rule lists. These are reconstructed defaults.
pub fn default_rules(family: &str) -> Result<Vec<ClassificationRule>, ConfigError> {
    let rules = match family {
        "crypto" => Vec::from([
            R { name: "encryption-key", groups: &["key"], patterns: &[Dat], directions: ANY_DIR, min: 64, max: None, objectives: &[C] },
            R {
                name: "text-data",
                groups: &["text", "data", "iv", "seed", "bank"],
                patterns: &[Dat],
                directions: ANY_DIR,
                min: 8,
                max: None,
                objectives: &[C],
            },
            R {
                name: "crypto-control",
                groups: &["enable", "start", "load", "valid", "done", "ready", "busy", "key"],
                patterns: &[Ctl],
                directions: IN_NET,
                min: 1,
                max: Some(1),
                objectives: &[A],
            },
            R {
                name: "crypto-config",
                groups: &["mode", "select", "round"],
                patterns: &[Cfg],
                directions: IN_NET,
                min: 2,
                max: Some(8),
                objectives: &[I, A],
            },
            R {
                name: "crypto-status",
                groups: &["done", "ready", "busy", "valid"],
                patterns: &[Sts],
                directions: OUT,
                min: 1,
                max: Some(1),
                objectives: &[I],
            },
        ]),
        "gpio" => Vec::from([
            R {
                name: "port-data",
                groups: &["data", "pad", "port", "gpio", "out", "in"],
                patterns: &[Dat],
                directions: ANY_DIR,
                min: 8,
                max: Some(64),
                objectives: &[C, I],
            },
            R {
                name: "gpio-direction",
                groups: &["oe", "dir", "enable"],
                patterns: &[Ctl, Cfg],
                directions: IN_NET,
                min: 1,
                max: None,
                objectives: &[I, A],
            },
            R {
                name: "gpio-status",
                groups: &["irq", "gpio", "in", "data"],
                patterns: &[Sts],
                directions: OUT,
                min: 1,
                max: Some(1),
                objectives: &[I],
            },
        ]),
        "peripheral" => Vec::from([
            R {
                name: "tx-rx-data",
                groups: &["tx", "rx", "data"],
                patterns: &[Dat],
                directions: ANY_DIR,
                min: 2,
                max: None,
                objectives: &[C],
            },
            R {
                name: "bus-address",
                groups: &["addr"],
                patterns: &[Dat, Cfg],
                directions: ANY_DIR,
                min: 2,
                max: None,
                objectives: &[C, I],
            },
            R {
                name: "bus-control",
                groups: &["enable", "cs", "sel", "valid", "ready", "tx", "rx"],
                patterns: &[Ctl],
                directions: IN_NET,
                min: 1,
                max: Some(1),
                objectives: &[A],
            },
            R {
                name: "bus-config",
                groups: &["baud", "sel", "addr", "enable"],
                patterns: &[Cfg],
                directions: IN_NET,
                min: 2,
                max: None,
                objectives: &[I, A],
            },
            R {
                name: "bus-status",
                groups: &["busy", "ready", "valid", "irq", "tx", "rx"],
                patterns: &[Sts],
                directions: OUT,
                min: 1,
                max: Some(1),
                objectives: &[I],
            },
        ]),
        other => return Err(ConfigError::UnknownFamily(other.into())),
    };
    Ok(rules.into_iter().map(R::build).collect())
}
