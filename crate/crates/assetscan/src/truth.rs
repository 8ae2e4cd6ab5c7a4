// SPDX-License-Identifier: Apache-2.0

//! Ground-truth CSV: a `module,signal,is_asset` header followed by one row per
//! labeled signal. `is_asset` is `0`, `1`, `true` or `false` in any case.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use assetscan_core::design::SignalRef;
use assetscan_core::eval::TruthEntry;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub entries: Vec<TruthEntry>,
    pub source: PathBuf,
}

const HEADER: [&str; 3] = ["module", "signal", "is_asset"];

fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" => Some(true),
        "0" | "false" => Some(false),
        _ => None,
    }
}

pub fn parse_ground_truth(reader: impl Read, source: &Path) -> Result<GroundTruth> {
    let err = |line: u64, message: String| Error::GroundTruth { path: source.to_path_buf(), line, message };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).comment(Some(b'#')).from_reader(reader);
    let header = rdr.headers().map_err(|e| err(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(err(1, format!("expected header `{}`", HEADER.join(","))));
    }
    let mut seen: BTreeMap<SignalRef, u64> = BTreeMap::new();
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 3 {
            return Err(err(line, format!("expected 3 fields, found {}", rec.len())));
        }
        if rec[0].is_empty() || rec[1].is_empty() {
            return Err(err(line, "module and signal must be non-empty".into()));
        }
        let is_asset = parse_flag(&rec[2]).ok_or_else(|| err(line, format!("is_asset `{}` is not 0, 1, true or false", &rec[2])))?;
        let signal = SignalRef::new(&rec[0], &rec[1]);
        if let Some(first) = seen.insert(signal.clone(), line) {
            return Err(err(line, format!("duplicate entry for {}.{} (first on line {first})", signal.module, signal.name)));
        }
        entries.push(TruthEntry { signal, is_asset });
    }
    Ok(GroundTruth { entries, source: source.to_path_buf() })
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ground_truth(file, path)
}
