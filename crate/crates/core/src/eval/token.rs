use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Counts, MetricsReport, Scheme};
use crate::align::TokenLabeling;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    Micro,
    Macro,
    Weighted,
}

impl Averaging {
    fn scheme(self) -> Scheme {
        match self {
            Averaging::Micro => Scheme::TokenMicro,
            Averaging::Macro => Scheme::TokenMacro,
            Averaging::Weighted => Scheme::TokenWeighted,
        }
    }
}

/// Token-level scoring over aligned gold/predicted labelings.
///
/// Per token, every label in both sets is a TP, a predicted label missing
/// from gold is an FP and a gold label missing from the prediction is an FN.
/// With single labels this is ordinary token classification with `O`
/// excluded. Macro and weighted averages cover only labels with gold support.
pub fn eval_token_level(
    gold: &[TokenLabeling],
    pred: &[TokenLabeling],
    averaging: Averaging,
) -> Result<MetricsReport> {
    if gold.len() != pred.len() {
        return Err(Error::Misaligned {
            index: gold.len().min(pred.len()),
            gold: format!("{} labelings", gold.len()),
            pred: format!("{} labelings", pred.len()),
        });
    }
    let mut counts = Counts::default();
    for (index, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.instance_id != p.instance_id {
            return Err(Error::Misaligned {
                index,
                gold: g.instance_id.clone(),
                pred: p.instance_id.clone(),
            });
        }
        if g.labels.len() != p.labels.len() {
            return Err(Error::TokenCountMismatch {
                id: g.instance_id.clone(),
                gold: g.labels.len(),
                pred: p.labels.len(),
            });
        }
        for (gs, ps) in g.labels.iter().zip(&p.labels) {
            for label in gs.intersection(ps) {
                counts.add(label, 1, 0, 0);
            }
            for label in ps.difference(gs) {
                counts.add(label, 0, 1, 0);
            }
            for label in gs.difference(ps) {
                counts.add(label, 0, 0, 1);
            }
        }
    }

    let mut report = MetricsReport::micro(averaging.scheme(), gold.len(), &counts);
    if averaging == Averaging::Micro {
        return Ok(report);
    }
    let supported: BTreeMap<_, _> = report
        .per_type
        .iter()
        .filter(|(_, s)| s.support > 0)
        .collect();
    if supported.is_empty() {
        report.precision = None;
        report.recall = None;
        report.f1 = None;
        return Ok(report);
    }
    let weight = |support: usize| match averaging {
        Averaging::Weighted => support as f64,
        _ => 1.0,
    };
    let total: f64 = supported.values().map(|s| weight(s.support)).sum();
    let avg = |f: fn(&super::TypeScore) -> f64| {
        supported
            .values()
            .map(|s| weight(s.support) * f(s))
            .sum::<f64>()
            / total
    };
    report.precision = Some(avg(|s| s.precision));
    report.recall = Some(avg(|s| s.recall));
    report.f1 = Some(avg(|s| s.f1));
    Ok(report)
}
