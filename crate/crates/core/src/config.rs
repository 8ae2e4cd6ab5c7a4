// SPDX-License-Identifier: Apache-2.0

//! IP-family keyword groups and rule sets.
//!
//! The bundled families are reconstructions: the published keyword lists and
//! rule tables are incomplete, so the defaults below were assembled from the
//! keyword examples and pattern associations described for each family.
//! Users can replace them with their own configuration files.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Direction, WidthClass};
use crate::classify::Behavior;
use crate::design::DesignDatabase;
use crate::keywords::VERILOG_KEYWORDS;
use crate::matcher::Matcher;
use crate::rules::ClassificationRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Confidentiality,
    Integrity,
    Availability,
}

/// Objectives each behavioral pattern carries by default.
pub fn pattern_objectives(b: Behavior) -> &'static [Objective] {
    match b {
        Behavior::Control => &[Objective::Availability],
        Behavior::Configuration => &[Objective::Integrity, Objective::Availability],
        Behavior::Status => &[Objective::Integrity],
        Behavior::Data => &[Objective::Confidentiality],
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IpFamily {
    Crypto,
    Gpio,
    Peripheral,
    #[serde(untagged)]
    Custom(String),
}

impl IpFamily {
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "crypto" => Some(IpFamily::Crypto),
            "gpio" => Some(IpFamily::Gpio),
            "peripheral" => Some(IpFamily::Peripheral),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            IpFamily::Crypto => "crypto",
            IpFamily::Gpio => "gpio",
            IpFamily::Peripheral => "peripheral",
            IpFamily::Custom(s) => s,
        }
    }
}

impl fmt::Display for IpFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialKeywordGroup {
    pub name: String,
    pub fragments: Vec<String>,
    pub expected_directions: BTreeSet<Direction>,
    pub expected_width_classes: BTreeSet<WidthClass>,
    pub objectives: BTreeSet<Objective>,
    #[serde(default)]
    pub exclude_fragments: Vec<String>,
}

impl PartialKeywordGroup {
    /// Whether a signal of this shape is what the group expects.
    pub fn expects(&self, direction: Direction, class: WidthClass) -> bool {
        let dir_ok = match direction {
            Direction::Inout => {
                self.expected_directions.contains(&Direction::Input) || self.expected_directions.contains(&Direction::Output)
            }
            d => self.expected_directions.contains(&d),
        };
        dir_ok && self.expected_width_classes.contains(&class)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub family: IpFamily,
    pub groups: Vec<PartialKeywordGroup>,
    pub global_exclusions: Vec<String>,
    pub rules: Vec<ClassificationRule>,
}

/// Clock and reset roots that every configuration must exclude.
pub const CLOCK_RESET: &[&str] = &["clk", "clock", "rst", "reset"];

const EXCLUSION_PREFIXES: &[&str] = &["", "i_", "o_"];
const EXCLUSION_SUFFIXES: &[&str] = &["", "_n", "n", "_i", "_ni", "_o"];

/// Default global exclusions: clock/reset roots and the Verilog reserved words.
pub fn default_exclusions() -> Vec<String> {
    CLOCK_RESET.iter().chain(VERILOG_KEYWORDS).map(|s| s.to_string()).collect()
}

/// True when `lower` is excluded outright. Reserved words match exactly; other
/// exclusions also match with the customary prefixes and polarity suffixes
/// (`rst_n`, `i_clk`, `clk_i`, `rst_ni`).
pub fn is_excluded_name(lower: &str, exclusions: &[String]) -> bool {
    exclusions.iter().any(|ex| {
        if lower == ex {
            return true;
        }
        if VERILOG_KEYWORDS.binary_search(&ex.as_str()).is_ok() {
            return false;
        }
        EXCLUSION_PREFIXES.iter().any(|p| {
            lower
                .strip_prefix(p)
                .and_then(|rest| rest.strip_prefix(ex.as_str()))
                .is_some_and(|suffix| EXCLUSION_SUFFIXES.contains(&suffix))
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("unknown IP family `{0}`; builtin families are crypto, gpio, peripheral")]
    UnknownFamily(String),
    #[error("group `{0}` is defined more than once")]
    DuplicateGroup(String),
    #[error("group `{0}` has no fragments")]
    EmptyFragments(String),
    #[error("group `{group}`: fragment `{fragment}` must be non-empty lowercase without whitespace")]
    InvalidFragment { group: String, fragment: String },
    #[error("group `{0}` has no security objectives")]
    NoObjectives(String),
    #[error("group `{group}`: fragment `{fragment}` is also a global exclusion")]
    FragmentIsExclusion { group: String, fragment: String },
    #[error("global exclusions must include `{0}`")]
    MissingClockReset(String),
    #[error("family has no rules")]
    NoRules,
    #[error("rule `{0}` is defined more than once")]
    DuplicateRule(String),
    #[error("rule `{0}` requires no groups")]
    RuleWithoutGroups(String),
    #[error("rule `{rule}` requires unknown group `{group}`")]
    UnknownGroup { rule: String, group: String },
    #[error("rule `{0}` requires no patterns")]
    RuleWithoutPatterns(String),
    #[error("rule `{0}` requires no directions")]
    RuleWithoutDirections(String),
    #[error("rule `{rule}`: width bounds {min}..{max} are invalid")]
    InvalidWidthBounds { rule: String, min: u32, max: u32 },
}

fn valid_fragment(f: &str) -> bool {
    !f.is_empty() && !f.chars().any(|c| c.is_whitespace() || c.is_uppercase())
}

impl FamilyConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for root in CLOCK_RESET {
            if !self.global_exclusions.iter().any(|e| e == root) {
                return Err(ConfigError::MissingClockReset((*root).into()));
            }
        }
        let mut names = BTreeSet::new();
        for g in &self.groups {
            if !names.insert(g.name.as_str()) {
                return Err(ConfigError::DuplicateGroup(g.name.clone()));
            }
            if g.fragments.is_empty() {
                return Err(ConfigError::EmptyFragments(g.name.clone()));
            }
            if g.objectives.is_empty() {
                return Err(ConfigError::NoObjectives(g.name.clone()));
            }
            for f in g.fragments.iter().chain(&g.exclude_fragments) {
                if !valid_fragment(f) {
                    return Err(ConfigError::InvalidFragment { group: g.name.clone(), fragment: f.clone() });
                }
            }
            for f in &g.fragments {
                if self.global_exclusions.contains(f) {
                    return Err(ConfigError::FragmentIsExclusion { group: g.name.clone(), fragment: f.clone() });
                }
            }
        }
        if self.rules.is_empty() {
            return Err(ConfigError::NoRules);
        }
        let mut rule_names = BTreeSet::new();
        for r in &self.rules {
            if !rule_names.insert(r.name.as_str()) {
                return Err(ConfigError::DuplicateRule(r.name.clone()));
            }
            if r.require_groups.is_empty() {
                return Err(ConfigError::RuleWithoutGroups(r.name.clone()));
            }
            if let Some(g) = r.require_groups.iter().find(|g| !names.contains(g.as_str())) {
                return Err(ConfigError::UnknownGroup { rule: r.name.clone(), group: g.clone() });
            }
            if r.require_patterns.is_empty() {
                return Err(ConfigError::RuleWithoutPatterns(r.name.clone()));
            }
            if r.require_directions.is_empty() {
                return Err(ConfigError::RuleWithoutDirections(r.name.clone()));
            }
            let max = r.max_width_bits.unwrap_or(u32::MAX);
            if r.min_width_bits == 0 || r.min_width_bits > max {
                return Err(ConfigError::InvalidWidthBounds { rule: r.name.clone(), min: r.min_width_bits, max });
            }
        }
        Ok(())
    }

    pub fn group(&self, name: &str) -> Option<&PartialKeywordGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn is_excluded(&self, name: &str) -> bool {
        is_excluded_name(&name.to_ascii_lowercase(), &self.global_exclusions)
    }
}

/// Occurrences of each group over every declared signal. A signal matching
/// several groups counts once for each.
pub fn count_keyword_occurrences(db: &DesignDatabase, config: &FamilyConfig) -> BTreeMap<String, usize> {
    let matcher = Matcher::new(config);
    let mut counts: BTreeMap<String, usize> = config.groups.iter().map(|g| (g.name.clone(), 0)).collect();
    for sig in db.signal_index.values() {
        let Some(matches) = matcher.match_name(&sig.name) else { continue };
        let groups: BTreeSet<&str> = matches.iter().map(|m| m.group.as_str()).collect();
        for g in groups {
            if let Some(c) = counts.get_mut(g) {
                *c += 1;
            }
        }
    }
    counts
}

// ---- bundled families ----

use Behavior::{Configuration as Cfg, Control as Ctl, Data as Dat, Status as Sts};

fn group(name: &str, fragments: &[&str], exclude: &[&str], roles: &[Behavior]) -> PartialKeywordGroup {
    let mut directions = BTreeSet::new();
    let mut classes = BTreeSet::new();
    let mut objectives = BTreeSet::new();
    for role in roles {
        match role {
            Ctl => {
                directions.extend([Direction::Input, Direction::Net]);
                classes.insert(WidthClass::Single);
            }
            Cfg => {
                directions.extend([Direction::Input, Direction::Net]);
                classes.insert(WidthClass::Narrow);
            }
            Sts => {
                directions.insert(Direction::Output);
                classes.insert(WidthClass::Single);
            }
            Dat => {
                directions.extend([Direction::Input, Direction::Output, Direction::Net]);
                classes.extend([WidthClass::Narrow, WidthClass::Wide]);
            }
        }
    }
    // Objectives follow the group's primary role, listed first.
    objectives.extend(roles.first().map_or(&[][..], |r| pattern_objectives(*r)).iter().copied());
    PartialKeywordGroup {
        name: name.into(),
        fragments: fragments.iter().map(|s| s.to_string()).collect(),
        expected_directions: directions,
        expected_width_classes: classes,
        objectives,
        exclude_fragments: exclude.iter().map(|s| s.to_string()).collect(),
    }
}

fn crypto_groups() -> Vec<PartialKeywordGroup> {
    Vec::from([
        group("key", &["key"], &[], &[Dat]),
        group("text", &["text"], &[], &[Dat]),
        group("data", &["data"], &[], &[Dat]),
        group("iv", &["iv"], &["ive"], &[Dat]),
        group("seed", &["seed"], &[], &[Dat]),
        group("round", &["round", "rnd"], &[], &[Cfg]),
        group("enable", &["en"], &["end"], &[Ctl]),
        group("start", &["start"], &[], &[Ctl]),
        group("done", &["done", "finish"], &[], &[Sts, Ctl]),
        group("ready", &["ready", "rdy"], &[], &[Sts, Ctl]),
        group("busy", &["busy"], &[], &[Sts]),
        group("valid", &["valid", "vld"], &[], &[Ctl, Sts]),
        group("load", &["load"], &[], &[Ctl]),
        group("mode", &["mode", "encdec"], &[], &[Cfg]),
        group("bank", &["bank"], &[], &[Dat]),
        group("select", &["sel"], &[], &[Cfg]),
    ])
}

fn gpio_groups() -> Vec<PartialKeywordGroup> {
    Vec::from([
        group("data", &["data"], &[], &[Dat]),
        group("pad", &["pad"], &[], &[Dat]),
        group("port", &["port"], &[], &[Dat]),
        group("gpio", &["gpio"], &[], &[Dat]),
        group("oe", &["oe", "oen"], &[], &[Ctl, Cfg]),
        group("enable", &["en"], &["end"], &[Ctl, Cfg]),
        group("dir", &["dir"], &[], &[Cfg]),
        group("irq", &["irq", "int"], &[], &[Sts]),
        group("out", &["out"], &[], &[Dat]),
        group("in", &["in"], &[], &[Dat]),
    ])
}

fn peripheral_groups() -> Vec<PartialKeywordGroup> {
    Vec::from([
        group("tx", &["tx"], &[], &[Dat]),
        group("rx", &["rx"], &[], &[Dat]),
        group("data", &["data"], &[], &[Dat]),
        group("enable", &["en"], &["end"], &[Ctl]),
        group("busy", &["busy"], &[], &[Sts]),
        group("ready", &["ready", "rdy"], &[], &[Sts, Ctl]),
        group("valid", &["valid", "vld"], &[], &[Ctl, Sts]),
        group("addr", &["addr"], &[], &[Dat, Cfg]),
        group("cs", &["cs"], &[], &[Ctl]),
        group("sel", &["sel"], &[], &[Ctl, Cfg]),
        group("irq", &["irq"], &[], &[Sts]),
        group("baud", &["baud"], &[], &[Cfg]),
    ])
}

/// A bundled family configuration.
pub fn builtin_config(name: &str) -> Result<FamilyConfig, ConfigError> {
    let family = IpFamily::builtin(name).ok_or_else(|| ConfigError::UnknownFamily(name.into()))?;
    let groups = match family {
        IpFamily::Crypto => crypto_groups(),
        IpFamily::Gpio => gpio_groups(),
        IpFamily::Peripheral => peripheral_groups(),
        IpFamily::Custom(_) => unreachable!("builtin() only yields bundled families"),
    };
    let rules = crate::rules::default_rules(name)?;
    Ok(FamilyConfig { family, groups, global_exclusions: default_exclusions(), rules })
}

pub const BUILTIN_FAMILIES: &[&str] = &["crypto", "gpio", "peripheral"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::build_database;
    use crate::parser::parse_source;
    use crate::preprocess::NoIncludes;
    use alloc::vec;

    #[test]
    fn builtins_validate() {
        for f in BUILTIN_FAMILIES {
            builtin_config(f).unwrap().validate().unwrap();
        }
        assert_eq!(builtin_config("dsp").unwrap_err(), ConfigError::UnknownFamily("dsp".into()));
    }

    #[test]
    fn crypto_has_text_and_enable() {
        let c = builtin_config("crypto").unwrap();
        assert!(c.groups.iter().any(|g| g.fragments.iter().any(|f| f == "text")));
        assert_eq!(c.group("enable").unwrap().fragments, ["en"]);
        for name in ["key", "text", "data", "iv", "seed", "round", "enable", "start", "done", "ready", "busy", "valid", "load", "mode"] {
            assert!(c.group(name).is_some(), "{name}");
        }
    }

    #[test]
    fn minimum_group_coverage() {
        let frags = |fam: &str| -> BTreeSet<String> {
            builtin_config(fam).unwrap().groups.into_iter().flat_map(|g| g.fragments).collect()
        };
        let gpio = frags("gpio");
        for f in ["data", "pad", "port", "oe", "oen", "en", "dir", "irq", "int", "out", "in"] {
            assert!(gpio.contains(f), "{f}");
        }
        let per = frags("peripheral");
        for f in ["tx", "rx", "data", "en", "busy", "ready", "valid", "addr", "cs", "sel", "irq"] {
            assert!(per.contains(f), "{f}");
        }
    }

    #[test]
    fn validation_errors() {
        let base = builtin_config("crypto").unwrap();
        let mut c = base.clone();
        c.groups[0].fragments.clear();
        assert_eq!(c.validate(), Err(ConfigError::EmptyFragments("key".into())));
        let mut c = base.clone();
        c.groups[0].fragments = vec!["Key".into()];
        assert!(matches!(c.validate(), Err(ConfigError::InvalidFragment { .. })));
        let mut c = base.clone();
        c.groups[0].fragments.push("clk".into());
        assert!(matches!(c.validate(), Err(ConfigError::FragmentIsExclusion { .. })));
        let mut c = base.clone();
        c.global_exclusions.retain(|e| e != "rst");
        assert_eq!(c.validate(), Err(ConfigError::MissingClockReset("rst".into())));
        let mut c = base.clone();
        c.rules.clear();
        assert_eq!(c.validate(), Err(ConfigError::NoRules));
        let mut c = base.clone();
        c.rules[0].require_groups = vec!["nope".into()];
        assert!(matches!(c.validate(), Err(ConfigError::UnknownGroup { .. })));
        let mut c = base;
        c.rules[0].max_width_bits = Some(c.rules[0].min_width_bits - 1);
        assert!(matches!(c.validate(), Err(ConfigError::InvalidWidthBounds { .. })));
    }

    #[test]
    fn clock_reset_closure() {
        let ex = default_exclusions();
        for n in ["clk", "clock", "rst", "reset", "rst_n", "resetn", "reset_n", "i_clk", "clk_i", "rst_ni", "o_rst"] {
            assert!(is_excluded_name(n, &ex), "{n}");
        }
        for n in ["clk_en", "reset_value", "rstate", "wire_x", "inputs"] {
            assert!(!is_excluded_name(n, &ex), "{n}");
        }
        assert!(is_excluded_name("wire", &ex));
    }

    #[test]
    fn fig4_occurrences() {
        let src = include_str!("../../../fixtures/data_splitter/data_splitter.v");
        let db = build_database(vec![parse_source("d.v", src, &NoIncludes)]).unwrap();
        let counts = count_keyword_occurrences(&db, &builtin_config("crypto").unwrap());
        assert_eq!(counts["data"], 2);
        assert_eq!(counts["bank"], 5);
        assert_eq!(counts["done"], 5);
        assert_eq!(counts["load"], 1);
    }

    #[test]
    fn multi_group_signal_counts_in_each() {
        let db = build_database(vec![parse_source("k.v", "module m(input key_enable);\nendmodule", &NoIncludes)]).unwrap();
        let counts = count_keyword_occurrences(&db, &builtin_config("crypto").unwrap());
        assert_eq!(counts["key"], 1);
        assert_eq!(counts["enable"], 1);
        assert_eq!(counts.values().sum::<usize>(), 2);
    }
}
