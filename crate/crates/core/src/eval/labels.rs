//! Instance-level label-set schemes: multi-label pairs, multi-word trigger
//! exact match and multi-class trigger accuracy.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Counts, MetricsReport, Scheme};
use crate::error::{Error, Result};
use crate::ingest::{is_multi_word, Instance};
use crate::parse::ParsedPrediction;
use crate::reformulate::{TaskKind, NONE_LABEL};

/// Looks up the ED prediction for each gold instance, in gold order.
fn pair_up<'a, G: Borrow<Instance>>(
    gold: &'a [G],
    preds: &'a [ParsedPrediction],
) -> Result<Vec<(&'a Instance, &'a ParsedPrediction)>> {
    let mut by_id: HashMap<&str, &ParsedPrediction> = HashMap::with_capacity(preds.len());
    for p in preds {
        if p.task != TaskKind::ED {
            return Err(Error::WrongTask {
                expected: TaskKind::ED,
                found: p.task,
            });
        }
        by_id.insert(p.instance_id.as_str(), p);
    }
    let mut missing = Vec::new();
    let mut pairs = Vec::with_capacity(gold.len());
    for g in gold {
        let g = g.borrow();
        match by_id.get(g.id.as_str()) {
            Some(p) => pairs.push((g, *p)),
            None => missing.push(g.id.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingPredictions { ids: missing });
    }
    Ok(pairs)
}

/// Gold (trigger, type) label set of an instance; `{NONE}` when negative.
fn gold_label_set(inst: &Instance) -> BTreeSet<(String, String)> {
    if inst.is_negative() {
        return BTreeSet::from([(NONE_LABEL.to_string(), NONE_LABEL.to_string())]);
    }
    inst.mentions
        .iter()
        .map(|m| (m.trigger_text.clone(), m.type_label()))
        .collect()
}

/// Predicted label set; `{NONE}` only when the generation was exactly NONE.
fn pred_label_set(pred: &ParsedPrediction) -> BTreeSet<(String, String)> {
    if pred.is_none {
        return BTreeSet::from([(NONE_LABEL.to_string(), NONE_LABEL.to_string())]);
    }
    pred.pairs()
        .map(|(t, ty)| (t.to_string(), ty.to_string()))
        .collect()
}

/// Instance-level multi-label scoring: a pair is a TP only when trigger
/// string and full type label both match; NONE is a label of its own.
pub fn eval_multilabel<G: Borrow<Instance>>(
    gold: &[G],
    preds: &[ParsedPrediction],
) -> Result<MetricsReport> {
    let pairs = pair_up(gold, preds)?;
    let mut counts = Counts::default();
    for (g, p) in &pairs {
        let gs = gold_label_set(g);
        let ps = pred_label_set(p);
        for (_, ty) in gs.intersection(&ps) {
            counts.add(ty, 1, 0, 0);
        }
        for (_, ty) in ps.difference(&gs) {
            counts.add(ty, 0, 1, 0);
        }
        for (_, ty) in gs.difference(&ps) {
            counts.add(ty, 0, 0, 1);
        }
    }
    Ok(MetricsReport::micro(
        Scheme::Multilabel,
        pairs.len(),
        &counts,
    ))
}

/// Exact-match accuracy over gold multi-word triggers. Each distinct gold
/// span counts once; it is matched when its full trigger string is among
/// the instance's predicted triggers.
pub fn eval_mwt<G: Borrow<Instance>>(
    gold: &[G],
    preds: &[ParsedPrediction],
) -> Result<MetricsReport> {
    let pairs = pair_up(gold, preds)?;
    let mut report = MetricsReport::empty(Scheme::MwtExactMatch, pairs.len());
    for (g, p) in &pairs {
        let predicted: BTreeSet<&str> = p.triggers().collect();
        let spans: BTreeMap<(usize, usize), &str> = g
            .mentions
            .iter()
            .filter(|m| is_multi_word(&m.trigger_text))
            .map(|m| ((m.start, m.end), m.trigger_text.as_str()))
            .collect();
        for trigger in spans.values() {
            report.support += 1;
            if predicted.contains(trigger) {
                report.tp += 1;
            } else {
                report.fn_ += 1;
            }
        }
    }
    if report.support > 0 {
        report.accuracy = Some(report.tp as f64 / report.support as f64);
    }
    Ok(report)
}

/// Mean per-trigger accuracy over multi-class triggers (one trigger string
/// with two or more gold types in an instance): the fraction of its gold
/// types that were predicted for that trigger string.
pub fn eval_mct<G: Borrow<Instance>>(
    gold: &[G],
    preds: &[ParsedPrediction],
) -> Result<MetricsReport> {
    let pairs = pair_up(gold, preds)?;
    let mut report = MetricsReport::empty(Scheme::MctAccuracy, pairs.len());
    let mut sum = 0.0;
    for (g, p) in &pairs {
        let mut gold_types: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
        for m in &g.mentions {
            gold_types
                .entry(&m.trigger_text)
                .or_default()
                .insert(m.type_label());
        }
        for (trigger, types) in gold_types.iter().filter(|(_, t)| t.len() >= 2) {
            let predicted: BTreeSet<&str> = p
                .pairs()
                .filter(|(t, _)| t == trigger)
                .map(|(_, ty)| ty)
                .collect();
            let hits = types
                .iter()
                .filter(|ty| predicted.contains(ty.as_str()))
                .count();
            report.support += 1;
            report.tp += hits;
            report.fn_ += types.len() - hits;
            sum += hits as f64 / types.len() as f64;
        }
    }
    if report.support > 0 {
        report.accuracy = Some(sum / report.support as f64);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{EventMention, Split};
    use crate::parse::parse_generation;

    const CALAIS: &str = "Police in Calais have dispersed a rowdy anti-migrant protest with tear gas after clashes with protesters and detained several far-right demonstrators.";

    fn calais() -> Instance {
        let det = CALAIS.find("detained").unwrap();
        let cla = CALAIS.find("clashes").unwrap();
        Instance::new("w", CALAIS, Split::Test)
            .with_mention(EventMention::from_label(
                det,
                det + 8,
                "detained",
                "movement.transportperson",
            ))
            .with_mention(EventMention::from_label(
                cla,
                cla + 7,
                "clashes",
                "conflict.attack",
            ))
    }

    fn ed(id: &str, raw: &str) -> ParsedPrediction {
        parse_generation(raw, TaskKind::ED, id)
    }

    #[test]
    fn single_task_output_misses_clashes() {
        let r = eval_multilabel(
            &[calais()],
            &[ed("w", "detained->movement.transportperson")],
        )
        .unwrap();
        assert_eq!((r.tp, r.fp, r.fn_), (1, 0, 1));
        assert_eq!(r.precision, Some(1.0));
        assert_eq!(r.recall, Some(0.5));
        assert!((r.f1.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn none_is_a_label() {
        let neg = Instance::new("n", "Nothing.", Split::Test);
        let r = eval_multilabel(std::slice::from_ref(&neg), &[ed("n", "NONE")]).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_), (1, 0, 0));
        let r = eval_multilabel(&[neg], &[ed("n", "x->y")]).unwrap();
        assert_eq!((r.tp, r.fp, r.fn_), (0, 1, 1));
    }

    #[test]
    fn partial_multi_word_is_not_a_match() {
        let text = "The meeting took place yesterday.";
        let inst = Instance::new("m", text, Split::Test).with_mention(EventMention::new(
            12,
            22,
            "took place",
            "process_start",
        ));
        let r = eval_multilabel(
            std::slice::from_ref(&inst),
            &[ed("m", "place->process_start")],
        )
        .unwrap();
        assert_eq!((r.tp, r.fp, r.fn_), (0, 1, 1));

        let partial = eval_mwt(
            std::slice::from_ref(&inst),
            &[ed("m", "place->process_start")],
        )
        .unwrap();
        assert_eq!(
            (partial.tp, partial.support, partial.accuracy),
            (0, 1, Some(0.0))
        );
        let full = eval_mwt(&[inst], &[ed("m", "took place->process_start")]).unwrap();
        assert_eq!((full.tp, full.accuracy), (1, Some(1.0)));
    }

    #[test]
    fn mwt_empty_denominator() {
        let r = eval_mwt(&[calais()], &[ed("w", "NONE")]).unwrap();
        assert_eq!(r.support, 0);
        assert_eq!(r.accuracy, None);
    }

    #[test]
    fn mct_rule() {
        let inst = Instance::new("p", "They were purchasing arms.", Split::Test)
            .with_mention(EventMention::from_label(
                10,
                20,
                "purchasing",
                "transaction.transferownership",
            ))
            .with_mention(EventMention::from_label(
                10,
                20,
                "purchasing",
                "transaction.transfermoney",
            ));
        let both =
            "purchasing->transaction.transferownership | purchasing->transaction.transfermoney";
        let acc = |raw: &str| {
            eval_mct(std::slice::from_ref(&inst), &[ed("p", raw)])
                .unwrap()
                .accuracy
        };
        assert_eq!(acc(both), Some(1.0));
        assert_eq!(acc("purchasing->transaction.transfermoney"), Some(0.5));
        assert_eq!(acc("buying->transaction.transfermoney"), Some(0.0));
        assert_eq!(acc("NONE"), Some(0.0));
    }

    #[test]
    fn missing_prediction_is_an_error() {
        match eval_multilabel(&[calais()], &[]) {
            Err(Error::MissingPredictions { ids }) => assert_eq!(ids, vec!["w"]),
            other => panic!("{other:?}"),
        }
    }
}
