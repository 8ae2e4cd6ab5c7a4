// SPDX-License-Identifier: Apache-2.0

//! Whole-design database, top-module detection and the connectivity graph.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;
use thiserror::Error;

use crate::ast::{AssignKind, Diagnostic, Formal, ModuleDef, Severity, SignalDecl, SourceUnit};

/// A signal identified by its module and name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SignalRef {
    pub module: String,
    pub name: String,
}

impl SignalRef {
    pub fn new(module: impl Into<String>, name: impl Into<String>) -> Self {
        Self { module: module.into(), name: name.into() }
    }
}

/// A diagnostic tagged with the file it came from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct FileDiagnostic {
    pub file: String,
    pub line: u32,
    pub severity: Severity,
    pub message: String,
}

impl FileDiagnostic {
    pub fn new(file: impl Into<String>, d: Diagnostic) -> Self {
        Self { file: file.into(), line: d.line, severity: d.severity, message: d.message }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignError {
    #[error("empty design")]
    EmptyDesign,
    #[error("unknown top module `{name}`; available modules: {}", available.join(", "))]
    UnknownTop { name: String, available: Vec<String> },
}

#[derive(Debug, Clone)]
pub struct DesignDatabase {
    pub modules_by_name: BTreeMap<String, ModuleDef>,
    pub top_modules: Vec<String>,
    /// Child module name to the set of modules instantiating it.
    pub instantiation_parents: BTreeMap<String, BTreeSet<String>>,
    pub signal_index: BTreeMap<SignalRef, SignalDecl>,
    pub diagnostics: Vec<FileDiagnostic>,
    pub file_count: usize,
    pub line_count: usize,
}

/// Index every module of every unit. Later definitions of a module name replace earlier ones.
pub fn build_database(units: Vec<SourceUnit>) -> Result<DesignDatabase, DesignError> {
    let mut modules_by_name: BTreeMap<String, ModuleDef> = BTreeMap::new();
    let mut diagnostics = Vec::new();
    let file_count = units.len();
    let mut line_count = 0;
    for unit in units {
        line_count += unit.line_count;
        diagnostics.extend(unit.diagnostics.into_iter().map(|d| FileDiagnostic::new(unit.path.as_str(), d)));
        for module in unit.modules {
            if let Some(prev) = modules_by_name.get(&module.name) {
                diagnostics.push(FileDiagnostic::new(
                    module.file.as_str(),
                    Diagnostic::warning(
                        module.start_line,
                        format!("module `{}` redefined; replaces the definition in {}:{}", module.name, prev.file, prev.start_line),
                    ),
                ));
            }
            modules_by_name.insert(module.name.clone(), module);
        }
    }
    if modules_by_name.is_empty() {
        return Err(DesignError::EmptyDesign);
    }

    let mut instantiation_parents: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (name, module) in &modules_by_name {
        for inst in &module.instantiations {
            if modules_by_name.contains_key(&inst.target_module) {
                instantiation_parents.entry(inst.target_module.clone()).or_default().insert(name.clone());
            } else {
                diagnostics.push(FileDiagnostic::new(
                    module.file.as_str(),
                    Diagnostic::warning(inst.line, format!("instance `{}` of unknown module `{}`", inst.instance_name, inst.target_module)),
                ));
            }
        }
    }

    let mut signal_index = BTreeMap::new();
    for (name, module) in &modules_by_name {
        for sig in module.signals() {
            signal_index.insert(SignalRef::new(name.as_str(), sig.name.as_str()), sig.clone());
        }
    }

    let mut top_modules: Vec<String> = modules_by_name
        .keys()
        .filter(|m| instantiation_parents.get(*m).is_none_or(|ps| ps.iter().all(|p| p == *m)))
        .cloned()
        .collect();
    if top_modules.is_empty() {
        // Every module sits on an instantiation cycle.
        top_modules = modules_by_name.keys().cloned().collect();
    }

    Ok(DesignDatabase {
        modules_by_name,
        top_modules,
        instantiation_parents,
        signal_index,
        diagnostics,
        file_count,
        line_count,
    })
}

impl DesignDatabase {
    pub fn module(&self, name: &str) -> Option<&ModuleDef> {
        self.modules_by_name.get(name)
    }

    pub fn signal(&self, r: &SignalRef) -> Option<&SignalDecl> {
        self.signal_index.get(r)
    }

    pub fn signal_count(&self) -> usize {
        self.signal_index.len()
    }

    /// Modules reachable from `top` through instantiations, `top` included.
    pub fn instance_tree(&self, top: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = Vec::from([String::from(top)]);
        while let Some(m) = stack.pop() {
            if !seen.insert(m.clone()) {
                continue;
            }
            if let Some(def) = self.modules_by_name.get(&m) {
                for inst in &def.instantiations {
                    if self.modules_by_name.contains_key(&inst.target_module) && !seen.contains(&inst.target_module) {
                        stack.push(inst.target_module.clone());
                    }
                }
            }
        }
        seen
    }
}

/// `[user_top]` when given and known, otherwise every module without a parent, sorted.
pub fn find_top_modules(db: &DesignDatabase, user_top: Option<&str>) -> Result<Vec<String>, DesignError> {
    match user_top {
        Some(name) if db.modules_by_name.contains_key(name) => Ok(Vec::from([String::from(name)])),
        Some(name) => Err(DesignError::UnknownTop {
            name: name.into(),
            available: db.modules_by_name.keys().cloned().collect(),
        }),
        None => Ok(db.top_modules.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeVia {
    InstantiationConnection,
    ContinuousAssign,
    ProceduralAssign,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ConnEdge {
    pub from: SignalRef,
    pub to: SignalRef,
    pub via: EdgeVia,
}

impl ConnEdge {
    pub fn reversed(&self) -> Self {
        Self { from: self.to.clone(), to: self.from.clone(), via: self.via }
    }
}

/// Undirected view over the design's connection edges.
#[derive(Debug, Clone, Default)]
pub struct Connectivity {
    pub edges: Vec<ConnEdge>,
    /// Identifiers on either side of a connection that name no signal or parameter.
    pub unresolved_endpoints: usize,
    pub diagnostics: Vec<FileDiagnostic>,
    adjacency: BTreeMap<SignalRef, Vec<usize>>,
}

impl Connectivity {
    fn from_edges(edges: BTreeSet<ConnEdge>, unresolved_endpoints: usize, diagnostics: Vec<FileDiagnostic>) -> Self {
        let edges: Vec<ConnEdge> = edges.into_iter().collect();
        let mut adjacency: BTreeMap<SignalRef, Vec<usize>> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            adjacency.entry(e.from.clone()).or_default().push(i);
            adjacency.entry(e.to.clone()).or_default().push(i);
        }
        Self { edges, unresolved_endpoints, diagnostics, adjacency }
    }

    /// Edges touching `node`, each oriented to start at `node`.
    pub fn neighbors<'a>(&'a self, node: &'a SignalRef) -> impl Iterator<Item = ConnEdge> + 'a {
        self.adjacency.get(node).into_iter().flatten().map(move |&i| {
            let e = &self.edges[i];
            if &e.from == node {
                e.clone()
            } else {
                e.reversed()
            }
        })
    }

    /// Shortest-path search from `start` along edges accepted by `follow`,
    /// never entering nodes for which `blocked` holds. Returns every target
    /// at the smallest depth where one exists, with a path to each, and
    /// whether the search stopped at `max_depth` with work left.
    pub fn bfs(
        &self,
        start: &SignalRef,
        max_depth: usize,
        follow: &dyn Fn(EdgeVia) -> bool,
        blocked: &dyn Fn(&SignalRef) -> bool,
        is_target: &dyn Fn(&SignalRef) -> bool,
    ) -> Search {
        let mut parent: BTreeMap<SignalRef, ConnEdge> = BTreeMap::new();
        let mut seen = BTreeSet::from([start.clone()]);
        let mut frontier = VecDeque::from([start.clone()]);
        for depth in 1..=max_depth {
            let mut next = VecDeque::new();
            let mut found = Vec::new();
            while let Some(node) = frontier.pop_front() {
                for edge in self.neighbors(&node) {
                    if !follow(edge.via) || seen.contains(&edge.to) || blocked(&edge.to) {
                        continue;
                    }
                    seen.insert(edge.to.clone());
                    parent.insert(edge.to.clone(), edge.clone());
                    if is_target(&edge.to) {
                        found.push(edge.to.clone());
                    } else {
                        next.push_back(edge.to.clone());
                    }
                }
            }
            if !found.is_empty() {
                found.sort();
                let hits = found
                    .into_iter()
                    .map(|t| {
                        let path = unwind(&parent, start, &t);
                        (t, path)
                    })
                    .collect();
                return Search { hits, depth, truncated: false };
            }
            if next.is_empty() {
                return Search { hits: Vec::new(), depth, truncated: false };
            }
            frontier = next;
        }
        Search { hits: Vec::new(), depth: max_depth, truncated: !frontier.is_empty() }
    }
}

fn unwind(parent: &BTreeMap<SignalRef, ConnEdge>, start: &SignalRef, target: &SignalRef) -> Vec<ConnEdge> {
    let mut path = Vec::new();
    let mut cur = target;
    while cur != start {
        let e = &parent[cur];
        path.push(e.clone());
        cur = &e.from;
    }
    path.reverse();
    path
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Search {
    /// Targets at the minimal depth, sorted, each with its path from the start.
    pub hits: Vec<(SignalRef, Vec<ConnEdge>)>,
    pub depth: usize,
    pub truncated: bool,
}

/// Edges for every instantiation connection and every assignment.
///
/// Assignment edges join each lhs identifier to every identifier the value
/// depends on: the rhs, ternary conditions, and conditions of enclosing
/// `if`/`case` statements.
pub fn build_connectivity(db: &DesignDatabase) -> Connectivity {
    let mut edges = BTreeSet::new();
    let mut unresolved = 0usize;
    let mut diagnostics = Vec::new();

    for (mname, module) in &db.modules_by_name {
        // classify each identifier once per module
        let resolve = |id: &str, unresolved: &mut usize| -> Option<SignalRef> {
            if module.signal(id).is_some() {
                Some(SignalRef::new(mname.as_str(), id))
            } else {
                if !module.is_parameter(id) {
                    *unresolved += 1;
                }
                None
            }
        };

        for st in &module.statements {
            let Some(kind) = st.kind.assign_kind() else { continue };
            let via = if kind == AssignKind::Continuous { EdgeVia::ContinuousAssign } else { EdgeVia::ProceduralAssign };
            let lhs: Vec<SignalRef> = st.lhs_identifiers.iter().filter_map(|id| resolve(id, &mut unresolved)).collect();
            let mut sources: Vec<&String> = st.rhs_identifiers.iter().chain(&st.cond_identifiers).chain(&st.guard_identifiers).collect();
            sources.sort();
            sources.dedup();
            for src in sources {
                let Some(s) = resolve(src, &mut unresolved) else { continue };
                for l in &lhs {
                    if *l != s {
                        edges.insert(ConnEdge { from: s.clone(), to: l.clone(), via });
                    }
                }
            }
        }

        for inst in &module.instantiations {
            let Some(child) = db.module(&inst.target_module) else { continue };
            let mut connected = BTreeSet::new();
            for conn in &inst.connections {
                let formal = match &conn.formal {
                    Formal::Named(n) => child.port(n),
                    Formal::Positional(i) => child.ports.get(*i),
                };
                let Some(formal) = formal else {
                    let what = match &conn.formal {
                        Formal::Named(n) => format!("`{n}`"),
                        Formal::Positional(i) => format!("#{i}"),
                    };
                    diagnostics.push(FileDiagnostic::new(
                        module.file.as_str(),
                        Diagnostic::warning(inst.line, format!("instance `{}` connects unknown port {what} of `{}`", inst.instance_name, child.name)),
                    ));
                    continue;
                };
                connected.insert(formal.name.as_str());
                let to = SignalRef::new(child.name.as_str(), formal.name.as_str());
                for id in &conn.actual {
                    if let Some(from) = resolve(id, &mut unresolved) {
                        edges.insert(ConnEdge { from, to: to.clone(), via: EdgeVia::InstantiationConnection });
                    }
                }
            }
            if inst.wildcard {
                for port in &child.ports {
                    if !connected.contains(port.name.as_str()) && module.signal(&port.name).is_some() {
                        edges.insert(ConnEdge {
                            from: SignalRef::new(mname.as_str(), port.name.as_str()),
                            to: SignalRef::new(child.name.as_str(), port.name.as_str()),
                            via: EdgeVia::InstantiationConnection,
                        });
                    }
                }
            }
        }
    }
    if unresolved > 0 {
        diagnostics.push(FileDiagnostic::new(
            "",
            Diagnostic::new(Severity::Info, 0, format!("{unresolved} connection endpoints did not resolve to a signal")),
        ));
    }
    Connectivity::from_edges(edges, unresolved, diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;
    use crate::preprocess::NoIncludes;
    use alloc::vec;

    fn db(srcs: &[&str]) -> DesignDatabase {
        let units = srcs.iter().enumerate().map(|(i, s)| parse_source(&format!("f{i}.v"), s, &NoIncludes)).collect();
        build_database(units).unwrap()
    }

    const A: &str = "module A(input din, output dout);\n  assign dout = din;\nendmodule\n";
    const B: &str = "module B(input top_in, output top_out);\n  A u0 (.din(top_in), .dout(top_out));\nendmodule\n";

    #[test]
    fn empty_design_is_an_error() {
        assert_eq!(build_database(Vec::new()).unwrap_err(), DesignError::EmptyDesign);
        let comment_only = parse_source("c.v", "// nothing\n", &NoIncludes);
        assert_eq!(build_database(vec![comment_only]).unwrap_err(), DesignError::EmptyDesign);
    }

    #[test]
    fn parents_and_tops() {
        let d = db(&[A, B]);
        assert_eq!(d.instantiation_parents["A"], BTreeSet::from(["B".into()]));
        assert_eq!(d.top_modules, ["B"]);
        assert_eq!(find_top_modules(&d, None).unwrap(), ["B"]);
        assert_eq!(find_top_modules(&d, Some("A")).unwrap(), ["A"]);
        let err = find_top_modules(&d, Some("missing")).unwrap_err();
        assert_eq!(err, DesignError::UnknownTop { name: "missing".into(), available: vec!["A".into(), "B".into()] });
        assert_eq!(d.signal_count(), 4);
        assert_eq!(d.instance_tree("B"), BTreeSet::from(["A".into(), "B".into()]));
    }

    #[test]
    fn redefinition_keeps_the_last_module() {
        let d = db(&[A, "module A(input x);\nendmodule\n"]);
        assert_eq!(d.module("A").unwrap().ports.len(), 1);
        assert!(d.diagnostics.iter().any(|x| x.message.contains("redefined")));
    }

    #[test]
    fn instantiation_and_assign_edges() {
        let d = db(&[A, B]);
        let c = build_connectivity(&d);
        let inst = ConnEdge {
            from: SignalRef::new("B", "top_in"),
            to: SignalRef::new("A", "din"),
            via: EdgeVia::InstantiationConnection,
        };
        assert!(c.edges.contains(&inst));
        assert!(c.edges.contains(&ConnEdge {
            from: SignalRef::new("A", "din"),
            to: SignalRef::new("A", "dout"),
            via: EdgeVia::ContinuousAssign,
        }));
        assert_eq!(c.edges.len(), 3);
        // both directions traverse
        let back: Vec<_> = c.neighbors(&SignalRef::new("A", "din")).collect();
        assert!(back.contains(&inst.reversed()));
    }

    #[test]
    fn assign_fans_out_each_operand() {
        let d = db(&["module m(input a, b, output y);\n  assign y = a & b;\nendmodule"]);
        let c = build_connectivity(&d);
        let pairs: Vec<_> = c.edges.iter().map(|e| (e.from.name.as_str(), e.to.name.as_str(), e.via)).collect();
        assert_eq!(pairs, [("a", "y", EdgeVia::ContinuousAssign), ("b", "y", EdgeVia::ContinuousAssign)]);
    }

    #[test]
    fn empty_body_has_no_edges() {
        let c = build_connectivity(&db(&["module m(input a);\nendmodule"]));
        assert!(c.edges.is_empty());
        assert_eq!(c.unresolved_endpoints, 0);
    }

    #[test]
    fn unknown_formal_is_skipped_with_diagnostic() {
        let d = db(&[A, "module T(input x);\n  A u (.nope(x), .din(x));\nendmodule"]);
        let c = build_connectivity(&d);
        assert_eq!(c.edges.iter().filter(|e| e.via == EdgeVia::InstantiationConnection).count(), 1);
        assert!(c.diagnostics.iter().any(|d| d.message.contains("unknown port `nope`")));
    }

    #[test]
    fn positional_and_wildcard_connections() {
        let d = db(&[
            A,
            "module P(input din, output q);\n  A u1 (.*);\n  A u2 (din, q);\nendmodule",
        ]);
        let c = build_connectivity(&d);
        let inst: Vec<_> = c.edges.iter().filter(|e| e.via == EdgeVia::InstantiationConnection).collect();
        // .* joins din; positional joins din->A.din and q->A.dout
        assert!(inst.iter().any(|e| e.from.name == "q" && e.to.name == "dout"));
        assert!(inst.iter().any(|e| e.from.name == "din" && e.to.name == "din"));
        assert_eq!(inst.len(), 2);
    }

    #[test]
    fn bfs_returns_all_targets_at_minimal_depth() {
        let d = db(&["module m(input a, b, output y, output z);\n  wire w;\n  assign w = a;\n  assign y = w;\n  assign z = w & b;\nendmodule"]);
        let c = build_connectivity(&d);
        let start = SignalRef::new("m", "a");
        let s = c.bfs(&start, 64, &|_| true, &|_| false, &|n| n.name == "y" || n.name == "z");
        assert_eq!(s.depth, 2);
        let found: Vec<_> = s.hits.iter().map(|(t, p)| (t.name.as_str(), p.len())).collect();
        assert_eq!(found, [("y", 2), ("z", 2)]);
        for (_, path) in &s.hits {
            assert_eq!(path[0].from, start);
            assert!(path.windows(2).all(|w| w[0].to == w[1].from));
        }
        let blocked = c.bfs(&start, 64, &|_| true, &|n| n.name == "w", &|n| n.name == "y");
        assert!(blocked.hits.is_empty());
        let short = c.bfs(&start, 1, &|_| true, &|_| false, &|n| n.name == "y");
        assert!(short.truncated);
    }
}
