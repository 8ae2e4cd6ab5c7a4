// SPDX-License-Identifier: Apache-2.0

//! Confusion-matrix evaluation against labeled asset lists.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::design::SignalRef;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthEntry {
    pub signal: SignalRef,
    pub is_asset: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// The matrix with predictions and labels exchanged.
    pub fn transposed(&self) -> Self {
        Self { tp: self.tp, fp: self.fn_, fn_: self.fp, tn: self.tn }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    #[serde(flatten)]
    pub confusion: Confusion,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// F1 had a zero denominator and was reported as 0.
    pub degenerate: bool,
    /// Truth entries naming no signal of the evaluated universe.
    pub ignored_truth_entries: Vec<SignalRef>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(c: Confusion) -> EvalResult {
    let f1_den = 2 * c.tp + c.fp + c.fn_;
    EvalResult {
        confusion: c,
        accuracy: ratio(c.tp + c.tn, c.total()),
        precision: ratio(c.tp, c.tp + c.fp),
        recall: ratio(c.tp, c.tp + c.fn_),
        f1: ratio(2 * c.tp, f1_den),
        degenerate: f1_den == 0,
        ignored_truth_entries: Vec::new(),
    }
}

/// Score `predicted` over `universe`. Signals the truth does not mention are
/// negatives; truth entries outside the universe are ignored and listed.
pub fn evaluate(predicted: &BTreeSet<SignalRef>, truth: &[TruthEntry], universe: &BTreeSet<SignalRef>) -> EvalResult {
    let labels: BTreeMap<&SignalRef, bool> = truth.iter().map(|t| (&t.signal, t.is_asset)).collect();
    let mut c = Confusion::default();
    for s in universe {
        let actual = labels.get(s).copied().unwrap_or(false);
        match (predicted.contains(s), actual) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    let mut r = metrics(c);
    r.ignored_truth_entries = truth.iter().filter(|t| !universe.contains(&t.signal)).map(|t| t.signal.clone()).collect();
    r
}

/// A 2x2 text rendering with predicted columns and actual rows.
pub fn confusion_table(r: &EvalResult) -> String {
    let c = r.confusion;
    let w = [c.tp, c.fp, c.fn_, c.tn].iter().map(|v| format!("{v}").len()).max().unwrap_or(1).max(4);
    format!(
        "{:>14} {:>w$} {:>w$}\n{:>14} {:>w$} {:>w$}\n{:>14} {:>w$} {:>w$}\naccuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}{}\n",
        "",
        "pred+",
        "pred-",
        "actual asset",
        c.tp,
        c.fn_,
        "actual other",
        c.fp,
        c.tn,
        r.accuracy,
        r.precision,
        r.recall,
        r.f1,
        if r.degenerate { "  (degenerate)" } else { "" },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn worked_example() {
        let r = metrics(Confusion { tp: 5, fp: 1, fn_: 2, tn: 92 });
        assert_eq!(r.accuracy, 0.97);
        assert!((r.f1 - 10.0 / 13.0).abs() < 1e-12);
        assert!(!r.degenerate);
    }

    #[test]
    fn zero_denominator_is_flagged() {
        let r = metrics(Confusion { tp: 0, fp: 0, fn_: 0, tn: 10 });
        assert_eq!(r.f1, 0.0);
        assert!(r.degenerate);
        assert_eq!(r.accuracy, 1.0);
    }

    #[test]
    fn unlabeled_signals_are_negatives_and_unknown_truth_is_ignored() {
        let s = |n: &str| SignalRef::new("m", n);
        let universe: BTreeSet<_> = [s("a"), s("b"), s("c")].into();
        let predicted: BTreeSet<_> = [s("a"), s("c")].into();
        let truth = [TruthEntry { signal: s("a"), is_asset: true }, TruthEntry { signal: s("zz"), is_asset: true }];
        let r = evaluate(&predicted, &truth, &universe);
        assert_eq!(r.confusion, Confusion { tp: 1, fp: 1, fn_: 0, tn: 1 });
        assert_eq!(r.ignored_truth_entries, [s("zz")]);
    }

    proptest! {
        #[test]
        fn identities(tp in 0u64..10_000, fp in 0u64..10_000, fn_ in 0u64..10_000, tn in 0u64..10_000) {
            let c = Confusion { tp, fp, fn_, tn };
            let r = metrics(c);
            if c.total() > 0 {
                prop_assert!((r.accuracy - (tp + tn) as f64 / c.total() as f64).abs() < 1e-12);
            }
            if 2 * tp + fp + fn_ > 0 {
                prop_assert!((r.f1 - 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64).abs() < 1e-12);
                // F1 is the harmonic mean of precision and recall when both are defined
                if r.precision + r.recall > 0.0 {
                    prop_assert!((r.f1 - 2.0 * r.precision * r.recall / (r.precision + r.recall)).abs() < 1e-9);
                }
            }
            for v in [r.accuracy, r.precision, r.recall, r.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let t = metrics(c.transposed());
            prop_assert_eq!(t.confusion.fp, fn_);
            prop_assert_eq!(t.confusion.fn_, fp);
            prop_assert_eq!(t.precision, r.recall);
            prop_assert_eq!(t.f1, r.f1);
        }
    }
}
