use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    compute_stats, eval_mct, eval_multilabel, eval_mwt, eval_token_level, split_pos, Averaging,
    DatasetStats, MetricsReport, Scheme, Subset,
};
use crate::align::{gold_labeling, is_ambiguous, project, OccurrencePolicy, TokenLabeling};
use crate::error::{Error, Result};
use crate::ingest::{split_type_label, Corpus, Instance, Split};
use crate::parse::{IssueKind, ParsedPrediction, PredictedItem, PredictionRecord};
use crate::reformulate::TaskKind;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub schemes: Vec<Scheme>,
    pub subsets: Vec<Subset>,
    pub occurrence: OccurrencePolicy,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            schemes: Scheme::ALL.to_vec(),
            subsets: vec![Subset::All, Subset::Pos],
            occurrence: OccurrencePolicy::All,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub predictions: usize,
    pub predictions_by_task: BTreeMap<TaskKind, usize>,
    pub evaluated_instances: usize,
    pub evaluated_splits: Vec<Split>,
    pub parse_issues: BTreeMap<IssueKind, usize>,
    pub predictions_with_issues: usize,
    /// Predicted ED pairs whose trigger string does not occur in the text.
    pub hallucinations: usize,
    /// Evaluated instances whose triggers cannot be localised from text alone.
    pub ambiguous_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub corpus: String,
    pub occurrence_policy: OccurrencePolicy,
    pub cells: Vec<MetricsReport>,
    /// Same schemes with subtypes dropped; present only when subtypes exist.
    pub relaxed_type_only: Vec<MetricsReport>,
    pub diagnostics: Diagnostics,
    pub stats: DatasetStats,
}

impl EvaluationReport {
    pub fn cell(&self, scheme: Scheme, subset: Subset) -> Option<&MetricsReport> {
        self.cells
            .iter()
            .find(|c| c.scheme == scheme && c.subset == subset)
    }
}

fn relax_instance(inst: &Instance) -> Instance {
    let mut out = inst.clone();
    for m in &mut out.mentions {
        m.subtype = None;
    }
    out
}

fn relax_prediction(pred: &ParsedPrediction) -> ParsedPrediction {
    let mut out = pred.clone();
    for item in &mut out.items {
        if let Some(ty) = &item.type_label {
            item.type_label = Some(split_type_label(ty).0.to_string());
        }
    }
    let mut seen = BTreeSet::new();
    out.items.retain(|i: &PredictedItem| seen.insert(i.clone()));
    out
}

fn score_subset(
    instances: &[&Instance],
    preds: &[ParsedPrediction],
    schemes: &[Scheme],
    policy: OccurrencePolicy,
) -> Result<Vec<MetricsReport>> {
    let needs_tokens = schemes.iter().any(|s| {
        matches!(
            s,
            Scheme::TokenMicro | Scheme::TokenMacro | Scheme::TokenWeighted
        )
    });
    let (mut gold_tok, mut pred_tok): (Vec<TokenLabeling>, Vec<TokenLabeling>) =
        (Vec::new(), Vec::new());
    if needs_tokens {
        let by_id: HashMap<&str, &ParsedPrediction> =
            preds.iter().map(|p| (p.instance_id.as_str(), p)).collect();
        for inst in instances {
            let pred = by_id
                .get(inst.id.as_str())
                .ok_or_else(|| Error::MissingPredictions {
                    ids: vec![inst.id.clone()],
                })?;
            gold_tok.push(gold_labeling(inst));
            pred_tok.push(project(pred, &inst.text, policy)?.labeling);
        }
    }
    schemes
        .iter()
        .map(|scheme| match scheme {
            Scheme::TokenMicro => eval_token_level(&gold_tok, &pred_tok, Averaging::Micro),
            Scheme::TokenMacro => eval_token_level(&gold_tok, &pred_tok, Averaging::Macro),
            Scheme::TokenWeighted => eval_token_level(&gold_tok, &pred_tok, Averaging::Weighted),
            Scheme::Multilabel => eval_multilabel(instances, preds),
            Scheme::MwtExactMatch => eval_mwt(instances, preds),
            Scheme::MctAccuracy => eval_mct(instances, preds),
        })
        .collect()
}

/// Scores ED predictions against a corpus under every requested scheme and
/// subset.
///
/// The evaluated instances are every instance of each split that has at
/// least one ED prediction; all of them must be predicted. Non-ED records
/// are parsed for diagnostics only.
pub fn evaluate(
    corpus: &Corpus,
    records: &[PredictionRecord],
    options: &EvalOptions,
) -> Result<EvaluationReport> {
    let mut diagnostics = Diagnostics {
        predictions: records.len(),
        ..Diagnostics::default()
    };
    let index: HashMap<&str, &Instance> = corpus
        .instances()
        .iter()
        .map(|i| (i.id.as_str(), i))
        .collect();
    let mut unknown = BTreeSet::new();
    let mut ed: Vec<ParsedPrediction> = Vec::new();
    let mut seen = BTreeSet::new();
    for rec in records {
        *diagnostics.predictions_by_task.entry(rec.task).or_insert(0) += 1;
        let parsed = rec.parse();
        if !parsed.diagnostics.is_empty() {
            diagnostics.predictions_with_issues += 1;
        }
        for issue in &parsed.diagnostics {
            *diagnostics.parse_issues.entry(issue.kind).or_insert(0) += 1;
        }
        if !index.contains_key(rec.instance_id.as_str()) {
            unknown.insert(rec.instance_id.clone());
            continue;
        }
        if rec.task == TaskKind::ED {
            if !seen.insert(rec.instance_id.clone()) {
                return Err(Error::DuplicatePrediction(rec.instance_id.clone()));
            }
            ed.push(parsed);
        }
    }
    if !unknown.is_empty() {
        return Err(Error::UnknownPredictions {
            ids: unknown.into_iter().collect(),
        });
    }

    let splits: BTreeSet<Split> = ed
        .iter()
        .map(|p| index[p.instance_id.as_str()].split)
        .collect();
    let evaluated: Vec<&Instance> = corpus
        .instances()
        .iter()
        .filter(|i| splits.contains(&i.split))
        .collect();
    let missing: Vec<String> = evaluated
        .iter()
        .filter(|i| !seen.contains(&i.id))
        .map(|i| i.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingPredictions { ids: missing });
    }
    diagnostics.evaluated_splits = splits.into_iter().collect();
    diagnostics.evaluated_instances = evaluated.len();
    diagnostics.ambiguous_instances = evaluated.iter().filter(|i| is_ambiguous(i)).count();
    let by_id: HashMap<&str, &ParsedPrediction> =
        ed.iter().map(|p| (p.instance_id.as_str(), p)).collect();
    for inst in &evaluated {
        diagnostics.hallucinations +=
            project(by_id[inst.id.as_str()], &inst.text, options.occurrence)?.hallucinations;
    }

    let (pos, all) = split_pos(&evaluated);
    let has_subtypes = evaluated
        .iter()
        .any(|i| i.mentions.iter().any(|m| m.subtype.is_some()));
    let relaxed_all: Vec<Instance> = if has_subtypes {
        all.iter().map(|i| relax_instance(i)).collect()
    } else {
        Vec::new()
    };
    let relaxed_preds: Vec<ParsedPrediction> = if has_subtypes {
        ed.iter().map(relax_prediction).collect()
    } else {
        Vec::new()
    };

    let mut cells = Vec::new();
    let mut relaxed_type_only = Vec::new();
    for &subset in &options.subsets {
        let chosen = match subset {
            Subset::All => &all,
            Subset::Pos => &pos,
        };
        cells.extend(
            score_subset(chosen, &ed, &options.schemes, options.occurrence)?
                .into_iter()
                .map(|r| r.with_subset(subset)),
        );
        if has_subtypes {
            let (rpos, rall) = split_pos(&relaxed_all);
            let chosen = match subset {
                Subset::All => &rall,
                Subset::Pos => &rpos,
            };
            relaxed_type_only.extend(
                score_subset(chosen, &relaxed_preds, &options.schemes, options.occurrence)?
                    .into_iter()
                    .map(|r| r.with_subset(subset)),
            );
        }
    }

    Ok(EvaluationReport {
        corpus: corpus.name().to_string(),
        occurrence_policy: options.occurrence,
        cells,
        relaxed_type_only,
        diagnostics,
        stats: compute_stats(corpus),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |x| format!("{:.2}", 100.0 * x))
}

fn write_rows(out: &mut String, rows: &[MetricsReport]) {
    let _ = writeln!(
        out,
        "{:<16} {:<6} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>8}",
        "scheme", "subset", "P", "R", "F1", "Acc", "TP", "FP", "FN", "support"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<16} {:<6} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>7} {:>8}",
            r.scheme.as_str(),
            r.subset.as_str(),
            fmt_opt(r.precision),
            fmt_opt(r.recall),
            fmt_opt(r.f1),
            fmt_opt(r.accuracy),
            r.tp,
            r.fp,
            r.fn_,
            r.support
        );
    }
}

/// Plain-text rendering of a report, scores in percent.
pub fn render_table(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "corpus: {}", report.corpus);
    write_rows(&mut out, &report.cells);
    if !report.relaxed_type_only.is_empty() {
        let _ = writeln!(out, "\ntype-only (subtypes dropped):");
        write_rows(&mut out, &report.relaxed_type_only);
    }
    let d = &report.diagnostics;
    let _ = writeln!(
        out,
        "\ninstances: {}  predictions: {}  with parse issues: {}  hallucinations: {}  ambiguous: {}",
        d.evaluated_instances, d.predictions, d.predictions_with_issues, d.hallucinations, d.ambiguous_instances
    );
    for (kind, n) in &d.parse_issues {
        let _ = writeln!(out, "  {:<22} {n}", kind.as_str());
    }
    out
}
