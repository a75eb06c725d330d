use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::{Corpus, Instance, Split};

/// Corpus statistics. Row-level figures cover every instance in the corpus;
/// the per-row averages are taken over event-containing rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub instances: usize,
    pub split_counts: BTreeMap<Split, usize>,
    /// Total annotated triggers (mentions).
    pub triggers: usize,
    /// Distinct rendered event types across all splits.
    pub types: usize,
    pub neg_pct: f64,
    pub events_per_row_avg: f64,
    pub events_per_row_max: usize,
    pub types_per_row_avg: f64,
    pub types_per_row_max: usize,
    /// Test-split types never seen in train; absent when either split is missing.
    pub zs_count: Option<usize>,
    pub zs_types: Vec<String>,
    /// Multi-word triggers as a % of all triggers.
    pub mwt_pct_instances: f64,
    /// % of rows with at least one multi-word trigger.
    pub mwt_pct_rows: f64,
    pub mwt_by_split: BTreeMap<Split, usize>,
    /// Triggers belonging to a multi-class trigger, as a % of all triggers.
    pub mct_pct_instances: f64,
    /// % of rows with at least one multi-class trigger.
    pub mct_pct_rows: f64,
    pub warnings: Vec<String>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Number of mentions whose trigger string carries two or more types in the instance.
fn multi_class_mentions(inst: &Instance) -> usize {
    let mut types: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for m in &inst.mentions {
        types
            .entry(&m.trigger_text)
            .or_default()
            .insert(m.type_label());
    }
    inst.mentions
        .iter()
        .filter(|m| types[m.trigger_text.as_str()].len() >= 2)
        .count()
}

pub fn compute_stats(corpus: &Corpus) -> DatasetStats {
    let rows = corpus.instances();
    let mut split_counts = BTreeMap::new();
    let mut mwt_by_split: BTreeMap<Split, usize> = BTreeMap::new();
    let mut all_types = BTreeSet::new();
    let (mut negatives, mut triggers) = (0, 0);
    let (mut events_sum, mut events_max, mut types_sum, mut types_max) = (0, 0, 0, 0);
    let (mut mwt, mut mwt_rows, mut mct, mut mct_rows) = (0, 0, 0, 0);

    for inst in rows {
        *split_counts.entry(inst.split).or_insert(0) += 1;
        let events = inst.mentions.len();
        triggers += events;
        if events == 0 {
            negatives += 1;
            continue;
        }
        let types: BTreeSet<String> = inst.mentions.iter().map(|m| m.type_label()).collect();
        events_sum += events;
        events_max = events_max.max(events);
        types_sum += types.len();
        types_max = types_max.max(types.len());
        all_types.extend(types);

        let row_mwt = inst.mentions.iter().filter(|m| m.is_multi_word()).count();
        mwt += row_mwt;
        mwt_rows += usize::from(row_mwt > 0);
        *mwt_by_split.entry(inst.split).or_insert(0) += row_mwt;
        let row_mct = multi_class_mentions(inst);
        mct += row_mct;
        mct_rows += usize::from(row_mct > 0);
    }

    let positives = rows.len() - negatives;
    let mut warnings = Vec::new();
    for split in [Split::Train, Split::Test] {
        if !split_counts.contains_key(&split) {
            warnings.push(format!("corpus has no {split} split"));
        }
    }
    let (zs_count, zs_types) =
        if split_counts.contains_key(&Split::Train) && split_counts.contains_key(&Split::Test) {
            let unseen: BTreeSet<String> = corpus
                .split(Split::Test)
                .flat_map(|i| i.mentions.iter().map(|m| m.type_label()))
                .filter(|t| !corpus.type_inventory().contains(t))
                .collect();
            (Some(unseen.len()), unseen.into_iter().collect())
        } else {
            (None, Vec::new())
        };

    DatasetStats {
        instances: rows.len(),
        split_counts,
        triggers,
        types: all_types.len(),
        neg_pct: pct(negatives, rows.len()),
        events_per_row_avg: if positives == 0 {
            0.0
        } else {
            events_sum as f64 / positives as f64
        },
        events_per_row_max: events_max,
        types_per_row_avg: if positives == 0 {
            0.0
        } else {
            types_sum as f64 / positives as f64
        },
        types_per_row_max: types_max,
        zs_count,
        zs_types,
        mwt_pct_instances: pct(mwt, triggers),
        mwt_pct_rows: pct(mwt_rows, rows.len()),
        mwt_by_split,
        mct_pct_instances: pct(mct, triggers),
        mct_pct_rows: pct(mct_rows, rows.len()),
        warnings,
    }
}
