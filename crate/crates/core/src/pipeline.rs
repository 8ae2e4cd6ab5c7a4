// SPDX-License-Identifier: Apache-2.0

//! The five stages over in-memory sources, and the per-top report.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;
use thiserror::Error;

use crate::ast::SourceUnit;
use crate::classify::{classify_design, BehaviorClassification};
use crate::config::{ConfigError, FamilyConfig};
use crate::design::{build_connectivity, build_database, find_top_modules, Connectivity, DesignDatabase, DesignError, FileDiagnostic, SignalRef};
use crate::eval::{evaluate, EvalResult, TruthEntry};
use crate::matcher::{match_elements, ImportantElement};
use crate::refine::{link_status_to_control, refine, PrimaryAsset};
use crate::rules::{apply_family_rules, CandidateAsset};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub file_count: usize,
    pub module_count: usize,
    pub signal_count: usize,
    pub line_count: usize,
}

/// Element counts after each stage. Extraction through filtering never
/// increases; refinement can merge or fan out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StageCounts {
    pub extraction: usize,
    pub matching: usize,
    /// Important elements holding at least one behavioral pattern.
    pub classification: usize,
    pub filtering: usize,
    pub refinement: usize,
}

impl StageCounts {
    pub fn is_narrowing(&self) -> bool {
        self.extraction >= self.matching && self.matching >= self.classification && self.classification >= self.filtering
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetReport {
    pub tool_version: String,
    pub family: String,
    pub top_module: String,
    pub corpus_stats: CorpusStats,
    pub stage_counts: StageCounts,
    pub assets: Vec<PrimaryAsset>,
    /// Candidates inside the top's tree that reach none of its ports.
    pub dropped_candidates: Vec<SignalRef>,
    pub diagnostics: Vec<FileDiagnostic>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvalResult>,
}

impl AssetReport {
    pub fn root_set(&self) -> BTreeSet<SignalRef> {
        self.assets.iter().map(PrimaryAsset::root_ref).collect()
    }
}

/// Every stage result that does not depend on the chosen top.
pub struct Analysis {
    pub config: FamilyConfig,
    pub db: DesignDatabase,
    pub conn: Connectivity,
    pub important: Vec<ImportantElement>,
    pub behaviors: BTreeMap<String, BehaviorClassification>,
    pub candidates: Vec<CandidateAsset>,
}

impl Analysis {
    pub fn new(units: Vec<SourceUnit>, config: FamilyConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let db = build_database(units)?;
        let conn = build_connectivity(&db);
        let important = match_elements(&db, &config);
        let behaviors = classify_design(&db);
        let candidates = apply_family_rules(&important, &behaviors, &config, &config.rules)?;
        Ok(Self { config, db, conn, important, behaviors, candidates })
    }

    pub fn tops(&self, user_top: Option<&str>) -> Result<Vec<String>, PipelineError> {
        Ok(find_top_modules(&self.db, user_top)?)
    }

    fn classified_count(&self) -> usize {
        self.important
            .iter()
            .filter(|e| self.behaviors.get(&e.signal.module).is_some_and(|b| !b.patterns_of(&e.signal.name).is_empty()))
            .count()
    }

    pub fn report(&self, top: &str, tool_version: &str) -> Result<AssetReport, PipelineError> {
        let refined = refine(&self.candidates, &self.db, &self.conn, top, &self.config)?;
        let assets = link_status_to_control(refined.assets, &self.conn, &self.behaviors);
        let mut diagnostics: Vec<FileDiagnostic> =
            self.db.diagnostics.iter().chain(&self.conn.diagnostics).chain(&refined.diagnostics).cloned().collect();
        diagnostics.sort();
        diagnostics.dedup();
        Ok(AssetReport {
            tool_version: tool_version.into(),
            family: self.config.family.as_str().into(),
            top_module: top.into(),
            corpus_stats: CorpusStats {
                file_count: self.db.file_count,
                module_count: self.db.modules_by_name.len(),
                signal_count: self.db.signal_count(),
                line_count: self.db.line_count,
            },
            stage_counts: StageCounts {
                extraction: self.db.signal_count(),
                matching: self.important.len(),
                classification: self.classified_count(),
                filtering: self.candidates.len(),
                refinement: assets.len(),
            },
            assets,
            dropped_candidates: refined.dropped,
            diagnostics,
            evaluation: None,
        })
    }

    /// All declared signals except clock and reset, as evaluated.
    pub fn universe(&self) -> BTreeSet<SignalRef> {
        self.db.signal_index.keys().filter(|r| !self.config.is_excluded(&r.name)).cloned().collect()
    }

    /// Score a report's roots against labeled truth.
    pub fn evaluate(&self, report: &AssetReport, truth: &[TruthEntry]) -> EvalResult {
        evaluate(&report.root_set(), truth, &self.universe())
    }
}

/// Run all stages and produce one report per top module.
pub fn run_pipeline(
    units: Vec<SourceUnit>,
    config: FamilyConfig,
    top: Option<&str>,
    tool_version: &str,
) -> Result<Vec<AssetReport>, PipelineError> {
    let analysis = Analysis::new(units, config)?;
    analysis.tops(top)?.iter().map(|t| analysis.report(t, tool_version)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::builtin_config;
    use crate::parser::parse_source;
    use crate::preprocess::NoIncludes;
    use alloc::vec;

    #[test]
    fn splitter_report() {
        let unit = parse_source("data_splitter.v", include_str!("../../../fixtures/data_splitter/data_splitter.v"), &NoIncludes);
        let reports = run_pipeline(vec![unit], builtin_config("crypto").unwrap(), None, "test").unwrap();
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert_eq!(r.top_module, "data_splitter");
        assert_eq!(r.corpus_stats, CorpusStats { file_count: 1, module_count: 1, signal_count: 14, line_count: 44 });
        assert_eq!(r.stage_counts.extraction, 14);
        assert!(r.stage_counts.is_narrowing(), "{:?}", r.stage_counts);
        assert_eq!(r.stage_counts.refinement, 8);
        assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let unit = parse_source("m.v", "module m; endmodule", &NoIncludes);
        let mut cfg = builtin_config("crypto").unwrap();
        cfg.rules.clear();
        assert_eq!(run_pipeline(vec![unit], cfg, None, "t").unwrap_err(), PipelineError::Config(ConfigError::NoRules));
    }
}
