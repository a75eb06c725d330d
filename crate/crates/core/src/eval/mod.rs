//! Evaluation schemes and corpus statistics.
//!
//! All ratios follow the same conventions: precision is `tp / (tp + fp)`,
//! recall `tp / (tp + fn)` and F1 their harmonic mean, each defined as 0 when
//! its denominator is 0. A scheme with nothing to score at all reports N/A
//! (`None`).

mod labels;
mod report;
mod stats;
mod token;

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ingest::Instance;

pub use labels::{eval_mct, eval_multilabel, eval_mwt};
pub use report::{evaluate, render_table, Diagnostics, EvalOptions, EvaluationReport};
pub use stats::{compute_stats, DatasetStats};
pub use token::{eval_token_level, Averaging};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    TokenMicro,
    TokenMacro,
    TokenWeighted,
    #[serde(rename = "multilabel_appB")]
    Multilabel,
    MwtExactMatch,
    MctAccuracy,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::TokenMicro,
        Scheme::TokenMacro,
        Scheme::TokenWeighted,
        Scheme::Multilabel,
        Scheme::MwtExactMatch,
        Scheme::MctAccuracy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::TokenMicro => "token_micro",
            Scheme::TokenMacro => "token_macro",
            Scheme::TokenWeighted => "token_weighted",
            Scheme::Multilabel => "multilabel_appB",
            Scheme::MwtExactMatch => "mwt_exact_match",
            Scheme::MctAccuracy => "mct_accuracy",
        }
    }

    /// Accuracy-style schemes report `accuracy` instead of P/R/F1.
    pub fn is_accuracy(self) -> bool {
        matches!(self, Scheme::MwtExactMatch | Scheme::MctAccuracy)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Scheme::ALL
            .into_iter()
            .find(|scheme| scheme.as_str().eq_ignore_ascii_case(s))
            .or(match s {
                "multilabel" => Some(Scheme::Multilabel),
                "mwt" => Some(Scheme::MwtExactMatch),
                "mct" => Some(Scheme::MctAccuracy),
                _ => None,
            })
            .ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    #[default]
    All,
    Pos,
}

impl Subset {
    pub fn as_str(self) -> &'static str {
        match self {
            Subset::All => "all",
            Subset::Pos => "pos",
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub(crate) fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub(crate) fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Counts and derived scores for one label.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeScore {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Gold occurrences (`tp + fn`).
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl TypeScore {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        TypeScore {
            tp,
            fp,
            fn_,
            support: tp + fn_,
            precision,
            recall,
            f1: harmonic(precision, recall),
        }
    }
}

/// Per-label count accumulator; summation order does not matter.
#[derive(Debug, Clone, Default)]
pub(crate) struct Counts {
    by_label: BTreeMap<String, (usize, usize, usize)>,
}

impl Counts {
    pub fn add(&mut self, label: &str, tp: usize, fp: usize, fn_: usize) {
        if tp + fp + fn_ == 0 {
            return;
        }
        let entry = self.by_label.entry(label.to_string()).or_default();
        entry.0 += tp;
        entry.1 += fp;
        entry.2 += fn_;
    }

    pub fn totals(&self) -> (usize, usize, usize) {
        self.by_label
            .values()
            .fold((0, 0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2))
    }

    pub fn per_type(&self) -> BTreeMap<String, TypeScore> {
        self.by_label
            .iter()
            .map(|(label, &(tp, fp, fn_))| (label.clone(), TypeScore::from_counts(tp, fp, fn_)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub scheme: Scheme,
    pub subset: Subset,
    pub instances: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub support: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub accuracy: Option<f64>,
    pub per_type: BTreeMap<String, TypeScore>,
}

impl MetricsReport {
    pub(crate) fn empty(scheme: Scheme, instances: usize) -> Self {
        MetricsReport {
            scheme,
            subset: Subset::All,
            instances,
            tp: 0,
            fp: 0,
            fn_: 0,
            support: 0,
            precision: None,
            recall: None,
            f1: None,
            accuracy: None,
            per_type: BTreeMap::new(),
        }
    }

    /// Micro-averaged report from per-label counts.
    pub(crate) fn micro(scheme: Scheme, instances: usize, counts: &Counts) -> Self {
        let (tp, fp, fn_) = counts.totals();
        let mut report = MetricsReport::empty(scheme, instances);
        report.tp = tp;
        report.fp = fp;
        report.fn_ = fn_;
        report.support = tp + fn_;
        report.per_type = counts.per_type();
        if tp + fp + fn_ > 0 {
            let s = TypeScore::from_counts(tp, fp, fn_);
            report.precision = Some(s.precision);
            report.recall = Some(s.recall);
            report.f1 = Some(s.f1);
        }
        report
    }

    pub fn with_subset(mut self, subset: Subset) -> Self {
        self.subset = subset;
        self
    }

    /// F1 for P/R/F1 schemes, accuracy for accuracy schemes.
    pub fn headline(&self) -> Option<f64> {
        if self.scheme.is_accuracy() {
            self.accuracy
        } else {
            self.f1
        }
    }
}

/// Instances with at least one gold mention, alongside the full set.
pub fn split_pos<G: Borrow<Instance>>(instances: &[G]) -> (Vec<&Instance>, Vec<&Instance>) {
    let all: Vec<&Instance> = instances.iter().map(Borrow::borrow).collect();
    let pos = all.iter().copied().filter(|i| !i.is_negative()).collect();
    (pos, all)
}
