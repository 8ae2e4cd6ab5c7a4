// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;

use assetscan_core::config::{builtin_config, count_keyword_occurrences, BUILTIN_FAMILIES};
use assetscan_core::design::{build_connectivity, build_database, SignalRef};
use assetscan_core::eval::TruthEntry;
use assetscan_core::matcher::{match_elements, Matcher};
use assetscan_core::pipeline::Analysis;
use assetscan_core::refine::refine;
use assetscan_core::{parse_source, NoIncludes, SourceUnit};
use proptest::prelude::*;

const SPLITTER: &str = include_str!("../../../fixtures/data_splitter/data_splitter.v");
const CORE_A: &str = include_str!("../../../fixtures/refine/case2_child_port/core_a.v");
const CASE2_TOP: &str = include_str!("../../../fixtures/refine/case2_child_port/case2_top.v");
const CASE3_CORE: &str = include_str!("../../../fixtures/refine/case3_net/case3_core.v");
const CASE3_TOP: &str = include_str!("../../../fixtures/refine/case3_net/case3_top.v");

fn units(srcs: &[&str]) -> Vec<SourceUnit> {
    srcs.iter().enumerate().map(|(i, s)| parse_source(&format!("f{i}.v"), s, &NoIncludes)).collect()
}

#[test]
fn fig4_scores_perfectly_against_its_labels() {
    let analysis = Analysis::new(units(&[SPLITTER]), builtin_config("crypto").unwrap()).unwrap();
    let report = analysis.report("data_splitter", "t").unwrap();
    let assets = ["load", "bank_selector", "data", "bank0", "bank1", "bank2", "bank3", "done"];
    let truth: Vec<TruthEntry> =
        assets.iter().map(|n| TruthEntry { signal: SignalRef::new("data_splitter", *n), is_asset: true }).collect();
    let r = analysis.evaluate(&report, &truth);
    assert_eq!((r.accuracy, r.f1), (1.0, 1.0));
    assert_eq!(r.confusion.total(), 13, "clk is outside the universe");
}

#[test]
fn refining_refined_roots_adds_nothing() {
    for srcs in [&[SPLITTER][..], &[CORE_A, CASE2_TOP], &[CASE3_CORE, CASE3_TOP]] {
        let analysis = Analysis::new(units(srcs), builtin_config("crypto").unwrap()).unwrap();
        let top = analysis.tops(None).unwrap().remove(0);
        let first = refine(&analysis.candidates, &analysis.db, &analysis.conn, &top, &analysis.config).unwrap();
        let again: Vec<_> = first
            .assets
            .iter()
            .map(|a| {
                let mut c = a.contributing_candidates[0].clone();
                c.signal = a.root_ref();
                c.direction = a.root.direction;
                c
            })
            .collect();
        let second = refine(&again, &analysis.db, &analysis.conn, &top, &analysis.config).unwrap();
        let r1: Vec<_> = first.assets.iter().map(|a| a.root_ref()).collect();
        let r2: Vec<_> = second.assets.iter().map(|a| a.root_ref()).collect();
        assert_eq!(r1, r2);
        assert!(second.assets.iter().all(|a| a.traces.iter().all(|t| t.path.is_empty())));
    }
}

#[test]
fn roots_are_distinct_and_top_ports_are_their_own_roots() {
    let analysis = Analysis::new(units(&[CASE3_CORE, CASE3_TOP]), builtin_config("crypto").unwrap()).unwrap();
    let report = analysis.report("case3_top", "t").unwrap();
    let roots: Vec<_> = report.assets.iter().map(|a| a.root_ref()).collect();
    let unique: BTreeSet<_> = roots.iter().cloned().collect();
    assert_eq!(roots.len(), unique.len());
    for c in analysis.candidates.iter().filter(|c| c.signal.module == "case3_top") {
        assert!(unique.contains(&c.signal));
    }
}

#[test]
fn clock_and_reset_variants_never_match() {
    for family in BUILTIN_FAMILIES {
        let cfg = builtin_config(family).unwrap();
        let m = Matcher::new(&cfg);
        for name in ["clk", "clock", "rst", "reset", "rst_n", "resetn", "reset_n", "i_clk", "clk_i", "rst_ni", "o_rst"] {
            assert_eq!(m.match_name(name), None, "{family}: {name}");
        }
    }
}

fn module_strategy() -> impl Strategy<Value = String> {
    let ident = proptest::sample::select(vec!["key", "data_in", "en", "done_q", "load", "gpio_oe", "tx_busy", "irq", "pad_o", "xyz"]);
    (proptest::collection::vec((ident, 1u32..40), 1..6), "[a-z]{3,6}").prop_map(|(sigs, name)| {
        let mut seen = BTreeSet::new();
        let decls: Vec<String> = sigs
            .into_iter()
            .enumerate()
            .filter(|(_, (s, _))| seen.insert(*s))
            .map(|(i, (s, w))| format!("  {} [{}:0] {s};\n", if i % 2 == 0 { "input" } else { "wire" }, w - 1))
            .collect();
        format!("module m_{name};\n{}endmodule\n", decls.concat())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn keyword_counts_are_monotone(base in module_strategy(), extra in module_strategy()) {
        prop_assume!(base.lines().next() != extra.lines().next());
        for family in BUILTIN_FAMILIES {
            let cfg = builtin_config(family).unwrap();
            let before = count_keyword_occurrences(&build_database(units(&[&base])).unwrap(), &cfg);
            let after = count_keyword_occurrences(&build_database(units(&[&base, &extra])).unwrap(), &cfg);
            for (g, n) in &before {
                prop_assert!(after[g] >= *n, "{} shrank", g);
            }
        }
    }

    #[test]
    fn matching_never_grows_the_signal_set(src in module_strategy()) {
        let db = build_database(units(&[&src])).unwrap();
        let _ = build_connectivity(&db);
        for family in BUILTIN_FAMILIES {
            prop_assert!(match_elements(&db, &builtin_config(family).unwrap()).len() <= db.signal_count());
        }
    }
}
