// SPDX-License-Identifier: Apache-2.0

//! Report emitters: canonical JSON, CSV and plain text.

use std::fmt::Write as _;

use assetscan_core::ast::Width;
use assetscan_core::pipeline::AssetReport;
use assetscan_core::refine::PrimaryAsset;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

/// Rebuild every object with its keys in lexicographic order.
pub fn canonicalize(v: Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut entries: Vec<(String, Value)> = map.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, canonicalize(v))).collect::<Map<_, _>>())
        }
        Value::Array(items) => Value::Array(items.into_iter().map(canonicalize).collect()),
        other => other,
    }
}

/// Pretty JSON with a trailing newline.
pub fn canonical_json(v: Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&canonicalize(v)).map_err(|e| Error::Serialize(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn to_json(reports: &[AssetReport]) -> Result<String> {
    let reports = serde_json::to_value(reports).map_err(|e| Error::Serialize(e.to_string()))?;
    let mut root = Map::new();
    root.insert("schema_version".into(), SCHEMA_VERSION.into());
    root.insert("reports".into(), reports);
    canonical_json(Value::Object(root))
}

fn width_text(w: Width) -> String {
    match w {
        Width::Bits(b) => b.to_string(),
        Width::Unresolved => "unresolved".into(),
    }
}

fn joined<T: serde::Serialize>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|i| serde_json::to_value(i).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default())
        .collect::<Vec<_>>()
        .join("|")
}

fn contributors(a: &PrimaryAsset) -> String {
    a.contributing_candidates.iter().map(|c| format!("{}.{}", c.signal.module, c.signal.name)).collect::<Vec<_>>().join("|")
}

pub const CSV_HEADER: [&str; 9] =
    ["top_module", "module", "signal", "direction", "width", "patterns", "objectives", "contributors", "outside_top_tree"];

pub fn to_csv(reports: &[AssetReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for r in reports {
        for a in &r.assets {
            w.write_record([
                r.top_module.as_str(),
                &a.root.module,
                &a.root.name,
                a.root.direction.as_str(),
                &width_text(a.root.width),
                &joined(&a.patterns),
                &joined(&a.objectives),
                &contributors(a),
                if a.outside_top_tree { "true" } else { "false" },
            ])
            .map_err(ser)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn to_text(reports: &[AssetReport]) -> String {
    let mut s = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            s.push('\n');
        }
        let c = &r.corpus_stats;
        let k = &r.stage_counts;
        let _ = writeln!(s, "top {}  family {}  assetscan {}", r.top_module, r.family, r.tool_version);
        let _ = writeln!(s, "corpus: {} files, {} modules, {} signals, {} lines", c.file_count, c.module_count, c.signal_count, c.line_count);
        let _ = writeln!(
            s,
            "stages: extraction {} > matching {} > classification {} > filtering {} > refinement {}",
            k.extraction, k.matching, k.classification, k.filtering, k.refinement
        );
        let _ = writeln!(s, "assets ({}):", r.assets.len());
        for a in &r.assets {
            let _ = writeln!(
                s,
                "  {}.{}  {} [{}]  patterns {}  objectives {}{}",
                a.root.module,
                a.root.name,
                a.root.direction.as_str(),
                width_text(a.root.width),
                joined(&a.patterns),
                joined(&a.objectives),
                if a.outside_top_tree { "  (outside top tree)" } else { "" },
            );
            let _ = writeln!(s, "      from {}", contributors(a));
        }
        if !r.dropped_candidates.is_empty() {
            let _ = writeln!(s, "dropped ({}):", r.dropped_candidates.len());
            for d in &r.dropped_candidates {
                let _ = writeln!(s, "  {}.{}", d.module, d.name);
            }
        }
        let _ = writeln!(s, "diagnostics: {}", r.diagnostics.len());
    }
    s
}

/// `group,count` rows in the configuration's group order.
pub fn stats_csv(rows: &[(String, usize)]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let ser = |e: csv::Error| Error::Serialize(e.to_string());
    w.write_record(["group", "count"]).map_err(ser)?;
    for (g, n) in rows {
        w.write_record([g.as_str(), &n.to_string()]).map_err(ser)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serialize(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render(reports: &[AssetReport], format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(reports),
        Format::Csv => to_csv(reports),
        Format::Text => Ok(to_text(reports)),
    }
}
