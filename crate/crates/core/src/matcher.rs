// SPDX-License-Identifier: Apache-2.0

//! Partial-keyword matching of signal names.
//!
//! Matching is case-insensitive substring search. A fragment occurrence is
//! suppressed when it lies wholly inside an occurrence of one of its group's
//! exclude fragments, so `en` does not fire inside `end` but still fires in
//! `end_en`.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use aho_corasick::AhoCorasick;
use serde::Serialize;

use crate::ast::{Direction, Width, WidthClass};
use crate::config::{is_excluded_name, FamilyConfig};
use crate::design::{DesignDatabase, SignalRef};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GroupMatch {
    pub group: String,
    pub fragment: String,
    /// Byte offset of the first unsuppressed occurrence in the lowercased name.
    #[serde(rename = "match_offset")]
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImportantElement {
    pub signal: SignalRef,
    pub direction: Direction,
    pub width: Width,
    pub width_class: WidthClass,
    pub decl_line: u32,
    pub matched_groups: Vec<GroupMatch>,
}

#[derive(Debug, Clone, Copy)]
enum Use {
    Fragment { group: usize, fragment: usize },
    Exclude { group: usize },
}

/// Compiled matcher for one family configuration.
pub struct Matcher<'c> {
    config: &'c FamilyConfig,
    automaton: AhoCorasick,
    /// Pattern id to every place the string appears in the configuration.
    uses: Vec<Vec<Use>>,
}

impl<'c> Matcher<'c> {
    pub fn new(config: &'c FamilyConfig) -> Self {
        let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
        let mut patterns: Vec<&str> = Vec::new();
        let mut uses: Vec<Vec<Use>> = Vec::new();
        let mut add = |s: &'c str, u: Use| {
            let id = *ids.entry(s).or_insert_with(|| {
                patterns.push(s);
                uses.push(Vec::new());
                patterns.len() - 1
            });
            uses[id].push(u);
        };
        for (gi, g) in config.groups.iter().enumerate() {
            for (fi, f) in g.fragments.iter().enumerate() {
                add(f, Use::Fragment { group: gi, fragment: fi });
            }
            for e in &g.exclude_fragments {
                add(e, Use::Exclude { group: gi });
            }
        }
        let automaton = AhoCorasick::new(&patterns).expect("fragment set fits the automaton");
        Self { config, automaton, uses }
    }

    /// Group matches for `name`, or `None` when the name is globally excluded.
    /// An empty list means no group matched.
    pub fn match_name(&self, name: &str) -> Option<Vec<GroupMatch>> {
        let lower = name.to_ascii_lowercase();
        if is_excluded_name(&lower, &self.config.global_exclusions) {
            return None;
        }
        let mut hits: Vec<(usize, usize, usize, usize)> = Vec::new(); // group, fragment, start, end
        let mut excludes: Vec<(usize, usize, usize)> = Vec::new(); // group, start, end
        for m in self.automaton.find_overlapping_iter(&lower) {
            for u in &self.uses[m.pattern().as_usize()] {
                match *u {
                    Use::Fragment { group, fragment } => hits.push((group, fragment, m.start(), m.end())),
                    Use::Exclude { group } => excludes.push((group, m.start(), m.end())),
                }
            }
        }
        let mut first: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (g, f, s, e) in hits {
            let suppressed = excludes.iter().any(|&(xg, xs, xe)| xg == g && xs <= s && e <= xe);
            if !suppressed {
                first.entry((g, f)).and_modify(|o| *o = (*o).min(s)).or_insert(s);
            }
        }
        Some(
            first
                .into_iter()
                .map(|((g, f), offset)| {
                    let group = &self.config.groups[g];
                    GroupMatch { group: group.name.clone(), fragment: group.fragments[f].clone(), offset }
                })
                .collect(),
        )
    }
}

/// Every declared signal with at least one group match, ordered by module then
/// declaration line.
pub fn match_elements(db: &DesignDatabase, config: &FamilyConfig) -> Vec<ImportantElement> {
    let matcher = Matcher::new(config);
    let mut out = Vec::new();
    for (mname, module) in &db.modules_by_name {
        let mut local: Vec<ImportantElement> = module
            .signals()
            .filter_map(|sig| {
                let groups = matcher.match_name(&sig.name)?;
                (!groups.is_empty()).then(|| ImportantElement {
                    signal: SignalRef::new(mname.as_str(), sig.name.as_str()),
                    direction: sig.direction,
                    width: sig.width,
                    width_class: sig.width_class,
                    decl_line: sig.decl_line,
                    matched_groups: groups,
                })
            })
            .collect();
        local.sort_by_key(|e| e.decl_line);
        out.extend(local);
    }
    out
}

/// Reference matcher: a direct scan of every fragment at every position.
pub fn match_oracle(name: &str, config: &FamilyConfig) -> Vec<(String, String)> {
    let lower: Vec<u8> = name.bytes().map(|b| b.to_ascii_lowercase()).collect();
    if oracle_excluded(&lower, config) {
        return Vec::new();
    }
    let occurs = |pat: &[u8], at: usize| lower.len() >= at + pat.len() && &lower[at..at + pat.len()] == pat;
    let mut out = Vec::new();
    for g in &config.groups {
        for f in &g.fragments {
            let f = f.as_bytes();
            let live = (0..lower.len()).filter(|&s| occurs(f, s)).any(|s| {
                let covered = g.exclude_fragments.iter().any(|x| {
                    let x = x.as_bytes();
                    (0..=s).any(|xs| occurs(x, xs) && s + f.len() <= xs + x.len())
                });
                !covered
            });
            if live {
                out.push((g.name.clone(), String::from_utf8_lossy(f).into_owned()));
            }
        }
    }
    out.sort();
    out
}

fn oracle_excluded(lower: &[u8], config: &FamilyConfig) -> bool {
    use crate::keywords::VERILOG_KEYWORDS;
    for ex in &config.global_exclusions {
        if lower == ex.as_bytes() {
            return true;
        }
        if VERILOG_KEYWORDS.contains(&ex.as_str()) {
            continue;
        }
        for p in ["", "i_", "o_"] {
            for s in ["", "_n", "n", "_i", "_ni", "_o"] {
                let form: Vec<u8> = [p.as_bytes(), ex.as_bytes(), s.as_bytes()].concat();
                if lower == form.as_slice() {
                    return true;
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{builtin_config, BUILTIN_FAMILIES};
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    fn groups_of(name: &str, family: &str) -> Vec<String> {
        let c = builtin_config(family).unwrap();
        let mut g: Vec<String> = Matcher::new(&c).match_name(name).unwrap_or_default().into_iter().map(|m| m.group).collect();
        g.dedup();
        g
    }

    #[test]
    fn key_rounding_enable_matches_three_groups() {
        assert_eq!(groups_of("key_rounding_enable", "crypto"), ["key", "round", "enable"]);
    }

    #[test]
    fn clock_is_excluded() {
        let c = builtin_config("crypto").unwrap();
        assert_eq!(Matcher::new(&c).match_name("clk"), None);
        assert_eq!(match_oracle("clk", &c), vec![]);
    }

    #[test]
    fn no_fragment_means_no_match() {
        assert!(groups_of("xyzzy", "crypto").is_empty());
        assert!(match_oracle("", &builtin_config("gpio").unwrap()).is_empty());
    }

    #[test]
    fn enable_spellings() {
        let c = builtin_config("crypto").unwrap();
        for n in ["write_en", "write_enable", "wen", "WEN"] {
            assert!(match_oracle(n, &c).contains(&("enable".to_string(), "en".to_string())), "{n}");
        }
        assert_eq!(groups_of("gpio_oen", "gpio"), ["gpio", "oe", "enable"]);
    }

    #[test]
    fn exclude_fragment_only_covers_its_span() {
        assert!(!groups_of("send", "crypto").contains(&"enable".into()));
        assert!(groups_of("end_en", "crypto").contains(&"enable".into()));
        assert!(!groups_of("active", "crypto").contains(&"iv".into()));
    }

    #[test]
    fn offsets_are_first_unsuppressed_occurrence() {
        let c = builtin_config("crypto").unwrap();
        let m = Matcher::new(&c).match_name("Blend_En").unwrap();
        let en = m.iter().find(|g| g.group == "enable").unwrap();
        // "blend_en": 'en' at 2 is inside "end", so the first live one is at 6
        assert_eq!(en.offset, 6);
    }

    fn name_strategy() -> impl Strategy<Value = String> {
        proptest::string::string_regex("[a-zA-Z_0-9]{0,14}").unwrap()
    }

    proptest! {
        #[test]
        fn production_equals_oracle(name in name_strategy()) {
            for fam in BUILTIN_FAMILIES {
                let c = builtin_config(fam).unwrap();
                let mut prod: Vec<(String, String)> = Matcher::new(&c)
                    .match_name(&name)
                    .unwrap_or_default()
                    .into_iter()
                    .map(|m| (m.group, m.fragment))
                    .collect();
                prod.sort();
                prop_assert_eq!(prod, match_oracle(&name, &c));
            }
        }

        #[test]
        fn reported_offsets_verify(name in name_strategy()) {
            let c = builtin_config("gpio").unwrap();
            let lower = name.to_ascii_lowercase();
            for m in Matcher::new(&c).match_name(&name).unwrap_or_default() {
                prop_assert_eq!(&lower[m.offset..m.offset + m.fragment.len()], m.fragment.as_str());
            }
        }
    }
}
