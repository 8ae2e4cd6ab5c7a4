// SPDX-License-Identifier: Apache-2.0

//! Tracing candidates to their roots at the top module's ports.
//!
//! A candidate that already is a top port is its own root. A port of another
//! module is searched through instantiation connections and continuous
//! assignments for the nearest top ports. A net is first expanded through
//! any connection to the nearest ports of its own module, which are then
//! treated as ports. Clock and reset signals are never entered.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::ast::{Diagnostic, Direction, Severity, Width};
use crate::classify::{Behavior, BehaviorClassification};
use crate::config::{FamilyConfig, Objective};
use crate::design::{ConnEdge, Connectivity, DesignDatabase, DesignError, EdgeVia, FileDiagnostic, SignalRef};
use crate::rules::CandidateAsset;

pub const MAX_DEPTH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RefineCase {
    TopPort,
    ChildPort,
    Net,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootSignal {
    pub module: String,
    pub name: String,
    pub direction: Direction,
    pub width: Width,
}

/// How one contributor reaches the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Trace {
    pub from: SignalRef,
    pub case: RefineCase,
    /// Connected edges, oriented from the contributor toward the root.
    pub path: Vec<ConnEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimaryAsset {
    pub root: RootSignal,
    pub contributing_candidates: Vec<CandidateAsset>,
    pub patterns: BTreeSet<Behavior>,
    pub objectives: BTreeSet<Objective>,
    pub traces: Vec<Trace>,
    /// Rooted in a module outside the top's instantiation tree.
    pub outside_top_tree: bool,
}

impl PrimaryAsset {
    pub fn root_ref(&self) -> SignalRef {
        SignalRef::new(self.root.module.as_str(), self.root.name.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Refinement {
    pub assets: Vec<PrimaryAsset>,
    /// Candidates inside the top's tree with no path to its ports.
    pub dropped: Vec<SignalRef>,
    pub diagnostics: Vec<FileDiagnostic>,
}

struct Ctx<'a> {
    db: &'a DesignDatabase,
    conn: &'a Connectivity,
    config: &'a FamilyConfig,
    top: &'a str,
    tree: BTreeSet<String>,
    diagnostics: Vec<FileDiagnostic>,
}

impl Ctx<'_> {
    fn is_port(&self, r: &SignalRef) -> bool {
        self.db.signal(r).is_some_and(|s| s.direction.is_port())
    }

    fn blocked(&self, r: &SignalRef) -> bool {
        self.config.is_excluded(&r.name)
    }

    fn note_truncation(&mut self, start: &SignalRef) {
        let file = self.db.module(&start.module).map(|m| m.file.clone()).unwrap_or_default();
        self.diagnostics.push(FileDiagnostic::new(
            file,
            Diagnostic::new(Severity::Warning, 0, format!("search from `{}.{}` stopped at depth {MAX_DEPTH}", start.module, start.name)),
        ));
    }

    /// Roots for a port: itself when on top, otherwise the nearest top ports.
    /// `None` when no top port is reachable.
    fn trace_port(&mut self, port: &SignalRef) -> Option<Vec<(SignalRef, RefineCase, Vec<ConnEdge>)>> {
        if port.module == self.top {
            return Some(Vec::from([(port.clone(), RefineCase::TopPort, Vec::new())]));
        }
        let top = self.top;
        let search = self.conn.bfs(
            port,
            MAX_DEPTH,
            &|via| matches!(via, EdgeVia::InstantiationConnection | EdgeVia::ContinuousAssign),
            &|n| self.blocked(n),
            &|n| n.module == top && self.is_port(n),
        );
        if search.truncated {
            self.note_truncation(port);
        }
        if search.hits.is_empty() {
            return None;
        }
        Some(search.hits.into_iter().map(|(t, p)| (t, RefineCase::ChildPort, p)).collect())
    }

    /// Roots for a net: nearest ports of its module, each traced as a port.
    fn trace_net(&mut self, net: &SignalRef) -> Option<Vec<(SignalRef, RefineCase, Vec<ConnEdge>)>> {
        let module = net.module.clone();
        let search = self.conn.bfs(net, MAX_DEPTH, &|_| true, &|n| self.blocked(n), &|n| n.module == module && self.is_port(n));
        if search.truncated {
            self.note_truncation(net);
        }
        let mut roots = Vec::new();
        for (port, prefix) in search.hits {
            if let Some(found) = self.trace_port(&port) {
                for (root, _, rest) in found {
                    let mut path = prefix.clone();
                    path.extend(rest);
                    roots.push((root, RefineCase::Net, path));
                }
            } else if !self.tree.contains(&port.module) {
                roots.push((port, RefineCase::Net, prefix));
            }
        }
        (!roots.is_empty()).then_some(roots)
    }
}

pub fn refine(
    candidates: &[CandidateAsset],
    db: &DesignDatabase,
    conn: &Connectivity,
    top: &str,
    config: &FamilyConfig,
) -> Result<Refinement, DesignError> {
    if db.module(top).is_none() {
        return Err(DesignError::UnknownTop { name: top.into(), available: db.modules_by_name.keys().cloned().collect() });
    }
    let mut ctx = Ctx { db, conn, config, top, tree: db.instance_tree(top), diagnostics: Vec::new() };
    let mut merged: BTreeMap<SignalRef, PrimaryAsset> = BTreeMap::new();
    let mut dropped = Vec::new();

    for cand in candidates {
        let Some(sig) = db.signal(&cand.signal) else { continue };
        if ctx.blocked(&cand.signal) {
            continue;
        }
        let found = if sig.direction.is_port() { ctx.trace_port(&cand.signal) } else { ctx.trace_net(&cand.signal) };
        let roots = match found {
            Some(r) => r,
            None if ctx.tree.contains(&cand.signal.module) => {
                dropped.push(cand.signal.clone());
                continue;
            }
            None => {
                let case = if sig.direction.is_port() { RefineCase::ChildPort } else { RefineCase::Net };
                Vec::from([(cand.signal.clone(), case, Vec::new())])
            }
        };
        for (root, case, path) in roots {
            let decl = db.signal(&root).expect("roots are indexed signals");
            let outside = !ctx.tree.contains(&root.module);
            let entry = merged.entry(root.clone()).or_insert_with(|| PrimaryAsset {
                root: RootSignal { module: root.module.clone(), name: root.name.clone(), direction: decl.direction, width: decl.width },
                contributing_candidates: Vec::new(),
                patterns: BTreeSet::new(),
                objectives: BTreeSet::new(),
                traces: Vec::new(),
                outside_top_tree: outside,
            });
            if !entry.contributing_candidates.iter().any(|c| c.signal == cand.signal) {
                entry.contributing_candidates.push(cand.clone());
            }
            entry.patterns.extend(cand.patterns.iter().copied());
            entry.objectives.extend(cand.objectives.iter().copied());
            let trace = Trace { from: cand.signal.clone(), case, path };
            if !entry.traces.contains(&trace) {
                entry.traces.push(trace);
            }
        }
    }
    let mut assets: Vec<PrimaryAsset> = merged.into_values().collect();
    for a in &mut assets {
        a.contributing_candidates.sort_by(|x, y| x.signal.cmp(&y.signal));
        a.traces.sort();
    }
    dropped.sort();
    dropped.dedup();
    Ok(Refinement { assets, dropped, diagnostics: ctx.diagnostics })
}

/// A Status asset feeding a Control signal of another module through
/// instantiations gains Availability; any other Status asset keeps Integrity.
pub fn link_status_to_control(
    mut assets: Vec<PrimaryAsset>,
    conn: &Connectivity,
    behaviors: &BTreeMap<String, BehaviorClassification>,
) -> Vec<PrimaryAsset> {
    for asset in &mut assets {
        if !asset.patterns.contains(&Behavior::Status) {
            continue;
        }
        let mut starts = Vec::from([asset.root_ref()]);
        starts.extend(asset.contributing_candidates.iter().map(|c| c.signal.clone()));
        let linked = starts.iter().any(|s| {
            let is_control_elsewhere = |n: &SignalRef| {
                n.module != s.module && behaviors.get(&n.module).is_some_and(|b| b.control_signals.contains(&n.name))
            };
            let hop_then_control = conn.bfs(
                s,
                MAX_DEPTH,
                &|via| via == EdgeVia::InstantiationConnection,
                &|_| false,
                &is_control_elsewhere,
            );
            !hop_then_control.hits.is_empty()
        });
        if linked {
            asset.objectives.insert(Objective::Availability);
        } else {
            asset.objectives.insert(Objective::Integrity);
        }
    }
    assets
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_design;
    use crate::config::builtin_config;
    use crate::design::{build_connectivity, build_database};
    use crate::matcher::match_elements;
    use crate::parser::parse_source;
    use crate::preprocess::NoIncludes;
    use crate::rules::apply_family_rules;
    use alloc::vec;

    struct Run {
        refined: Refinement,
        linked: Vec<PrimaryAsset>,
    }

    fn run(srcs: &[&str], top: &str) -> Run {
        let units = srcs.iter().enumerate().map(|(i, s)| parse_source(&format!("f{i}.v"), s, &NoIncludes)).collect();
        let db = build_database(units).unwrap();
        let cfg = builtin_config("crypto").unwrap();
        let conn = build_connectivity(&db);
        let behaviors = classify_design(&db);
        let cands = apply_family_rules(&match_elements(&db, &cfg), &behaviors, &cfg, &cfg.rules).unwrap();
        let refined = refine(&cands, &db, &conn, top, &cfg).unwrap();
        let linked = link_status_to_control(refined.assets.clone(), &conn, &behaviors);
        Run { refined, linked }
    }

    fn roots(assets: &[PrimaryAsset]) -> Vec<String> {
        assets.iter().map(|a| format!("{}.{}", a.root.module, a.root.name)).collect()
    }

    #[test]
    fn splitter_roots() {
        let r = run(&[include_str!("../../../fixtures/data_splitter/data_splitter.v")], "data_splitter");
        let names: BTreeSet<String> = r.refined.assets.iter().map(|a| a.root.name.clone()).collect();
        let expected: BTreeSet<String> =
            ["load", "bank_selector", "data", "bank0", "bank1", "bank2", "bank3", "done"].iter().map(|s| String::from(*s)).collect();
        assert_eq!(names, expected);
        let load = r.refined.assets.iter().find(|a| a.root.name == "load").unwrap();
        assert_eq!(load.traces, [Trace { from: SignalRef::new("data_splitter", "load"), case: RefineCase::TopPort, path: vec![] }]);
        let done = r.refined.assets.iter().find(|a| a.root.name == "done").unwrap();
        let contributors: Vec<_> = done.contributing_candidates.iter().map(|c| c.signal.name.as_str()).collect();
        assert_eq!(contributors, ["done", "done0", "done1", "done2", "done3"]);
        for t in &done.traces {
            assert!(t.path.windows(2).all(|w| w[0].to == w[1].from));
            if let Some(first) = t.path.first() {
                assert_eq!(first.from, t.from);
                assert_eq!(t.path.last().unwrap().to, done.root_ref());
            }
        }
    }

    const A: &str = "module A(input din, input [127:0] data_in, output reg [127:0] data_out);\n always @* if (din) data_out = data_in;\nendmodule\n";
    const B: &str = "module B(input top_in, input [127:0] bus, output [127:0] q);\n A u0 (.din(top_in), .data_in(bus), .data_out(q));\nendmodule\n";

    #[test]
    fn child_port_traces_through_one_instantiation() {
        let cfg = builtin_config("crypto").unwrap();
        let db = build_database(vec![parse_source("a.v", A, &NoIncludes), parse_source("b.v", B, &NoIncludes)]).unwrap();
        let conn = build_connectivity(&db);
        let behaviors = classify_design(&db);
        let cands = apply_family_rules(&match_elements(&db, &cfg), &behaviors, &cfg, &cfg.rules).unwrap();
        let din = cands.iter().find(|c| c.signal == SignalRef::new("A", "din")).cloned();
        // `din` matches no crypto group; use a synthetic candidate for it
        let din = din.unwrap_or_else(|| CandidateAsset {
            signal: SignalRef::new("A", "din"),
            direction: Direction::Input,
            width: Width::Bits(1),
            matched_rule: "test".into(),
            patterns: [Behavior::Control].into(),
            objectives: [Objective::Availability].into(),
            matched_groups: vec![],
            evidence: vec![],
        });
        let r = refine(&[din], &db, &conn, "B", &cfg).unwrap();
        assert_eq!(roots(&r.assets), ["B.top_in"]);
        assert_eq!(r.assets[0].traces[0].path.len(), 1);
        assert_eq!(r.assets[0].traces[0].case, RefineCase::ChildPort);
    }

    #[test]
    fn unreachable_net_inside_tree_is_dropped() {
        let leaf = "module leaf(input clk, output reg [7:0] data_q);\n reg [7:0] key_state;\n reg key_busy;\n always @(posedge clk) if (key_busy) key_state <= key_state + 1;\nendmodule\n";
        let top = "module top(input clk, output [7:0] data_q);\n leaf u (.clk(clk), .data_q(data_q));\nendmodule\n";
        let r = run(&[leaf, top], "top");
        assert!(r.refined.assets.iter().all(|a| a.root.name != "key_busy"));
        assert_eq!(r.refined.dropped, [SignalRef::new("leaf", "key_busy")]);
    }

    #[test]
    fn module_outside_tree_keeps_its_candidate() {
        let other = "module other(input load, input [127:0] data, output reg [127:0] q);\n always @* if (load) q = data;\nendmodule\n";
        let top = "module top(input x, output y);\n assign y = x;\nendmodule\n";
        let r = run(&[other, top], "top");
        let outside: Vec<_> = r.refined.assets.iter().filter(|a| a.outside_top_tree).map(|a| a.root.name.as_str()).collect();
        assert_eq!(outside, ["data", "load"]);
    }

    #[test]
    fn status_feeding_control_elsewhere_gains_availability() {
        let child = "module child(input start, output reg done);\n always @* done = start;\nendmodule\n";
        let parent = "module parent(input start, output reg busy);\n wire start_next;\n child c (.start(start), .done(start_next));\n always @* if (start_next) busy = 1'b1;\nendmodule\n";
        let r = run(&[child, parent], "child");
        let done = r.linked.iter().find(|a| a.root.name == "done").unwrap();
        assert!(done.objectives.contains(&Objective::Availability));

        let alone = run(&["module solo(input start, output reg done);\n always @* done = start;\nendmodule\n"], "solo");
        let done = alone.linked.iter().find(|a| a.root.name == "done").unwrap();
        assert!(done.objectives.contains(&Objective::Integrity));
        assert!(!done.objectives.contains(&Objective::Availability));
        assert!(link_status_to_control(Vec::new(), &Connectivity::default(), &BTreeMap::new()).is_empty());
    }

    #[test]
    fn unknown_top_is_an_error() {
        let cfg = builtin_config("crypto").unwrap();
        let db = build_database(vec![parse_source("a.v", A, &NoIncludes)]).unwrap();
        assert!(refine(&[], &db, &build_connectivity(&db), "nope", &cfg).is_err());
    }
}
