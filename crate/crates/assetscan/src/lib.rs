// SPDX-License-Identifier: Apache-2.0

//! Filesystem, file-format and command-line layer over `assetscan-core`.

pub mod config_file;
pub mod error;
pub mod report;
pub mod source;
pub mod truth;

use std::path::Path;

use assetscan_core::config::{count_keyword_occurrences, FamilyConfig};
use assetscan_core::pipeline::{Analysis, AssetReport};

pub use config_file::{config_to_toml, load_config_file, load_family_config};
pub use error::{Error, Result};
pub use report::Format;
pub use source::load_sources;
pub use truth::{load_ground_truth, GroundTruth};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `config` takes precedence over `family`, which is a builtin name or a path.
pub fn resolve_config(family: &str, config: Option<&Path>) -> Result<FamilyConfig> {
    match config {
        Some(path) => load_config_file(path),
        None => load_family_config(family),
    }
}

/// Parse the corpus and run every stage that does not depend on the top.
pub fn analyze(rtl_dir: &Path, config: FamilyConfig) -> Result<Analysis> {
    let units = load_sources(rtl_dir)?;
    if units.iter().all(|u| u.modules.is_empty()) {
        return Err(Error::NoModules(rtl_dir.to_path_buf()));
    }
    Ok(Analysis::new(units, config)?)
}

/// One report per top; scored when ground truth is given.
pub fn reports(analysis: &Analysis, top: Option<&str>, truth: Option<&GroundTruth>) -> Result<Vec<AssetReport>> {
    let mut out = Vec::new();
    for t in analysis.tops(top)? {
        let mut r = analysis.report(&t, TOOL_VERSION)?;
        if let Some(truth) = truth {
            r.evaluation = Some(analysis.evaluate(&r, &truth.entries));
        }
        out.push(r);
    }
    Ok(out)
}

/// Keyword-group occurrence counts in configuration order.
pub fn keyword_stats(analysis: &Analysis) -> Vec<(String, usize)> {
    let counts = count_keyword_occurrences(&analysis.db, &analysis.config);
    analysis.config.groups.iter().map(|g| (g.name.clone(), counts.get(&g.name).copied().unwrap_or(0))).collect()
}
