//! Synthetic data and brute-force oracles shared by the edkit test suites.
//!
//! The oracles deliberately use plain loops over vectors rather than the
//! set arithmetic the library uses, so the two can be checked against each
//! other.

use std::collections::BTreeSet;

use edkit::align::{Token, TokenLabeling};
use edkit::{Corpus, EventMention, Instance, Split};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

const FILLER: &[&str] = &[
    "the",
    "a",
    "of",
    "officials",
    "said",
    "on",
    "Monday",
    "city",
    "near",
    "report",
    "after",
    "with",
    "in",
    "région",
    "naïve",
    "über",
    "residents",
    "were",
    "by",
    "late",
];

const TYPES: &[&str] = &[
    "conflict.attack",
    "life.die",
    "movement.transportperson",
    "transaction.transferownership",
    "transaction.transfermoney",
    "contact.contact",
    "process_start",
    "blood_vessel_development",
    "Attack",
];

const PUNCT: &[&str] = &[",", ".", ";", "!"];

fn fresh_word<R: Rng>(rng: &mut R, used: &mut BTreeSet<String>) -> String {
    const ALPHABET: &[char] = &[
        'a', 'b', 'c', 'd', 'e', 'g', 'k', 'm', 'o', 'r', 's', 't', 'u', 'z', 'A', 'D', 'K', 'é',
        'ü', 'ß', 'ø',
    ];
    loop {
        let len = rng.random_range(3..9);
        let w: String = (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect();
        if !FILLER.contains(&w.as_str()) && used.insert(w.clone()) {
            return w;
        }
    }
}

fn random_type<R: Rng>(rng: &mut R) -> String {
    if rng.random_bool(0.7) {
        TYPES.choose(rng).unwrap().to_string()
    } else {
        let mut used = BTreeSet::new();
        let head = fresh_word(rng, &mut used);
        if rng.random_bool(0.5) {
            format!("{head}.{}", fresh_word(rng, &mut used))
        } else {
            head
        }
    }
}

/// A random valid instance whose triggers are token-aligned and
/// unambiguous: every occurrence of a trigger string in the text is
/// annotated, always with the same type set. Includes multi-word triggers,
/// multi-class triggers, repeated occurrences and negatives.
pub fn random_instance<R: Rng>(rng: &mut R, id: &str, split: Split) -> Instance {
    let mut used = BTreeSet::new();
    let n_triggers = if rng.random_bool(0.2) {
        0
    } else {
        rng.random_range(1..5)
    };
    // (trigger, types, occurrences)
    let mut events: Vec<(String, Vec<String>, usize)> = Vec::new();
    for _ in 0..n_triggers {
        let words = if rng.random_bool(0.25) {
            rng.random_range(2..4)
        } else {
            1
        };
        let trigger = (0..words)
            .map(|_| fresh_word(rng, &mut used))
            .collect::<Vec<_>>()
            .join(" ");
        let n_types = if rng.random_bool(0.2) {
            rng.random_range(2..4)
        } else {
            1
        };
        let mut types: Vec<String> = Vec::new();
        while types.len() < n_types {
            let t = random_type(rng);
            if !types.contains(&t) {
                types.push(t);
            }
        }
        let occurrences = if rng.random_bool(0.15) { 2 } else { 1 };
        events.push((trigger, types, occurrences));
    }

    let mut segments: Vec<Option<usize>> = events
        .iter()
        .enumerate()
        .flat_map(|(i, e)| std::iter::repeat_n(Some(i), e.2))
        .collect();
    let fillers = rng.random_range(1..12);
    segments.extend(std::iter::repeat_n(None, fillers));
    segments.shuffle(rng);

    let mut text = String::new();
    let mut len = 0usize;
    let mut mentions = Vec::new();
    for seg in segments {
        if !text.is_empty() {
            text.push(' ');
            len += 1;
        }
        let word = match seg {
            Some(i) => {
                let (trigger, types, _) = &events[i];
                let start = len;
                let end = start + trigger.chars().count();
                for ty in types {
                    mentions.push(EventMention::from_label(start, end, trigger, ty));
                }
                trigger.clone()
            }
            None => FILLER.choose(rng).unwrap().to_string(),
        };
        len += word.chars().count();
        text.push_str(&word);
        if rng.random_bool(0.2) {
            let p = PUNCT.choose(rng).unwrap();
            text.push_str(p);
            len += 1;
        }
    }
    mentions.shuffle(rng);
    Instance {
        id: id.to_string(),
        text,
        split,
        granularity: edkit::Granularity::Sentence,
        mentions,
    }
}

pub fn random_corpus<R: Rng>(rng: &mut R, n: usize) -> Corpus {
    let instances = (0..n)
        .map(|i| {
            let split = match rng.random_range(0..10) {
                0..=5 => Split::Train,
                6 => Split::Dev,
                _ => Split::Test,
            };
            random_instance(rng, &format!("syn{i}"), split)
        })
        .collect();
    Corpus::new("synthetic", instances).expect("generated instances are valid")
}

/// Random labelings of up to 50 tokens over a small label pool; tokens
/// occasionally carry two labels.
pub fn random_labeling_pair<R: Rng>(rng: &mut R, id: &str) -> (TokenLabeling, TokenLabeling) {
    const POOL: &[&str] = &["A", "B", "C", "D.x", "D.y"];
    let n = rng.random_range(1..=50);
    let draw = |rng: &mut R| -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        if rng.random_bool(0.4) {
            set.insert(POOL.choose(rng).unwrap().to_string());
            if rng.random_bool(0.1) {
                set.insert(POOL.choose(rng).unwrap().to_string());
            }
        }
        set
    };
    let tokens: Vec<Token> = (0..n)
        .map(|i| Token {
            text: format!("w{i}"),
            start: 3 * i,
            end: 3 * i + 2,
        })
        .collect();
    let gold: Vec<BTreeSet<String>> = (0..n).map(|_| draw(rng)).collect();
    let pred: Vec<BTreeSet<String>> = gold
        .iter()
        .map(|g| {
            if rng.random_bool(0.6) {
                g.clone()
            } else {
                draw(rng)
            }
        })
        .collect();
    let mk = |labels| TokenLabeling {
        instance_id: id.to_string(),
        tokens: tokens.clone(),
        labels,
    };
    (mk(gold), mk(pred))
}

/// Micro, macro and weighted (P, R, F1) by direct per-token enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TokenOracle {
    pub micro: (f64, f64, f64),
    pub macro_avg: Option<(f64, f64, f64)>,
    pub weighted: Option<(f64, f64, f64)>,
    pub counts: (usize, usize, usize),
}

fn prf(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    let p = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let r = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let f = if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    (p, r, f)
}

pub fn brute_force_token_scores(gold: &[TokenLabeling], pred: &[TokenLabeling]) -> TokenOracle {
    let mut universe: Vec<String> = Vec::new();
    for l in gold.iter().chain(pred) {
        for set in &l.labels {
            for label in set {
                if !universe.contains(label) {
                    universe.push(label.clone());
                }
            }
        }
    }
    let mut per_type: Vec<(usize, usize, usize)> = Vec::new();
    for label in &universe {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for (g, p) in gold.iter().zip(pred) {
            for k in 0..g.labels.len() {
                let in_gold = g.labels[k].iter().any(|x| x == label);
                let in_pred = p.labels[k].iter().any(|x| x == label);
                match (in_gold, in_pred) {
                    (true, true) => tp += 1,
                    (false, true) => fp += 1,
                    (true, false) => fn_ += 1,
                    (false, false) => {}
                }
            }
        }
        per_type.push((tp, fp, fn_));
    }
    let total = per_type
        .iter()
        .fold((0, 0, 0), |a, c| (a.0 + c.0, a.1 + c.1, a.2 + c.2));
    let supported: Vec<((f64, f64, f64), f64)> = per_type
        .iter()
        .filter(|c| c.0 + c.2 > 0)
        .map(|c| (prf(c.0, c.1, c.2), (c.0 + c.2) as f64))
        .collect();
    let average = |weighted: bool| -> Option<(f64, f64, f64)> {
        if supported.is_empty() {
            return None;
        }
        let mut acc = (0.0, 0.0, 0.0);
        let mut w_sum = 0.0;
        for ((p, r, f), support) in &supported {
            let w = if weighted { *support } else { 1.0 };
            acc.0 += w * p;
            acc.1 += w * r;
            acc.2 += w * f;
            w_sum += w;
        }
        Some((acc.0 / w_sum, acc.1 / w_sum, acc.2 / w_sum))
    };
    TokenOracle {
        micro: prf(total.0, total.1, total.2),
        macro_avg: average(false),
        weighted: average(true),
        counts: total,
    }
}

/// Instance-level (trigger, type) multi-label counts with NONE as a label.
/// `preds[i]` is `None` for a NONE generation, else its pair list.
pub fn brute_force_multilabel(
    gold: &[Instance],
    preds: &[Option<Vec<(String, String)>>],
) -> (usize, usize, usize) {
    let none = || vec![("NONE".to_string(), "NONE".to_string())];
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (g, p) in gold.iter().zip(preds) {
        let mut gl: Vec<(String, String)> = Vec::new();
        for m in &g.mentions {
            let pair = (m.trigger_text.clone(), m.type_label());
            if !gl.contains(&pair) {
                gl.push(pair);
            }
        }
        if gl.is_empty() {
            gl = none();
        }
        let mut pl: Vec<(String, String)> = Vec::new();
        for pair in p.clone().unwrap_or_else(none) {
            if !pl.contains(&pair) {
                pl.push(pair);
            }
        }
        for pair in &pl {
            if gl.contains(pair) {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        fn_ += gl.iter().filter(|pair| !pl.contains(pair)).count();
    }
    (tp, fp, fn_)
}

/// A perturbed version of the gold pairs: drops, spurious additions, type
/// swaps, partial multi-word triggers and NONE outputs.
pub fn perturb_prediction<R: Rng>(rng: &mut R, gold: &Instance) -> Option<Vec<(String, String)>> {
    if rng.random_bool(0.1) {
        return None;
    }
    let mut pairs: Vec<(String, String)> = Vec::new();
    for m in &gold.mentions {
        if rng.random_bool(0.2) {
            continue;
        }
        let mut trigger = m.trigger_text.clone();
        let mut ty = m.type_label();
        if rng.random_bool(0.15) {
            ty = TYPES.choose(rng).unwrap().to_string();
        }
        if rng.random_bool(0.2) {
            if let Some(last) = trigger.split_whitespace().last() {
                trigger = last.to_string();
            }
        }
        pairs.push((trigger, ty));
    }
    if rng.random_bool(0.3) {
        pairs.push((
            "spurious".to_string(),
            TYPES.choose(rng).unwrap().to_string(),
        ));
    }
    if pairs.is_empty() && rng.random_bool(0.5) {
        return None;
    }
    Some(pairs)
}

/// Renders a pair list (or NONE) as an ED generation.
pub fn render_pairs(pairs: &Option<Vec<(String, String)>>) -> String {
    match pairs {
        None => "NONE".to_string(),
        Some(p) => p
            .iter()
            .map(|(t, ty)| format!("{t}->{ty}"))
            .collect::<Vec<_>>()
            .join(" | "),
    }
}

/// Hand recount of the row-level statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsOracle {
    pub instances: usize,
    pub triggers: usize,
    pub types: usize,
    pub neg_pct: f64,
    pub events_avg: f64,
    pub events_max: usize,
    pub types_avg: f64,
    pub types_max: usize,
    pub split_counts: Vec<(Split, usize)>,
    pub zs_count: usize,
    pub zs_types: Vec<String>,
    pub mwt_by_split: Vec<(Split, usize)>,
    pub mwt_pct_instances: f64,
    pub mwt_pct_rows: f64,
    pub mct_pct_instances: f64,
    pub mct_pct_rows: f64,
}

pub fn brute_force_stats(instances: &[Instance]) -> StatsOracle {
    let n = instances.len();
    let mut negatives = 0;
    let mut triggers = 0;
    let mut all_types: Vec<String> = Vec::new();
    let mut train_types: Vec<String> = Vec::new();
    let mut test_types: Vec<String> = Vec::new();
    let mut events = Vec::new();
    let mut types_per_row = Vec::new();
    let (mut mwt, mut mwt_rows, mut mct, mut mct_rows) = (0, 0, 0, 0);
    let mut split_counts: Vec<(Split, usize)> = Vec::new();
    let mut mwt_by_split: Vec<(Split, usize)> = Vec::new();
    for inst in instances {
        match split_counts.iter_mut().find(|(s, _)| *s == inst.split) {
            Some(entry) => entry.1 += 1,
            None => split_counts.push((inst.split, 1)),
        }
        triggers += inst.mentions.len();
        if inst.mentions.is_empty() {
            negatives += 1;
            continue;
        }
        events.push(inst.mentions.len());
        let mut row_types: Vec<String> = Vec::new();
        for m in &inst.mentions {
            let t = m.type_label();
            if !row_types.contains(&t) {
                row_types.push(t.clone());
            }
            if !all_types.contains(&t) {
                all_types.push(t.clone());
            }
            match inst.split {
                Split::Train if !train_types.contains(&t) => train_types.push(t),
                Split::Test if !test_types.contains(&t) => test_types.push(t),
                _ => {}
            }
        }
        types_per_row.push(row_types.len());
        let row_mwt = inst
            .mentions
            .iter()
            .filter(|m| m.trigger_text.split_whitespace().count() > 1)
            .count();
        mwt += row_mwt;
        if row_mwt > 0 {
            mwt_rows += 1;
        }
        match mwt_by_split.iter_mut().find(|(s, _)| *s == inst.split) {
            Some(entry) => entry.1 += row_mwt,
            None => mwt_by_split.push((inst.split, row_mwt)),
        }
        let mut row_mct = 0;
        for m in &inst.mentions {
            let mut types: Vec<String> = Vec::new();
            for other in &inst.mentions {
                if other.trigger_text == m.trigger_text && !types.contains(&other.type_label()) {
                    types.push(other.type_label());
                }
            }
            if types.len() >= 2 {
                row_mct += 1;
            }
        }
        mct += row_mct;
        if row_mct > 0 {
            mct_rows += 1;
        }
    }
    let pct = |a: usize, b: usize| {
        if b == 0 {
            0.0
        } else {
            100.0 * a as f64 / b as f64
        }
    };
    let mean = |v: &[usize]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<usize>() as f64 / v.len() as f64
        }
    };
    let mut zs_types: Vec<String> = test_types
        .iter()
        .filter(|t| !train_types.contains(t))
        .cloned()
        .collect();
    zs_types.sort();
    split_counts.sort();
    mwt_by_split.sort();
    StatsOracle {
        instances: n,
        split_counts,
        zs_types: zs_types.clone(),
        mwt_by_split,
        triggers,
        types: all_types.len(),
        neg_pct: pct(negatives, n),
        events_avg: mean(&events),
        events_max: events.iter().copied().max().unwrap_or(0),
        types_avg: mean(&types_per_row),
        types_max: types_per_row.iter().copied().max().unwrap_or(0),
        zs_count: zs_types.len(),
        mwt_pct_instances: pct(mwt, triggers),
        mwt_pct_rows: pct(mwt_rows, n),
        mct_pct_instances: pct(mct, triggers),
        mct_pct_rows: pct(mct_rows, n),
    }
}

/// The WikiEvents sentence with its two gold events, in annotation order.
pub fn calais_instance() -> Instance {
    const TEXT: &str = "Police in Calais have dispersed a rowdy anti-migrant protest with tear gas after clashes with protesters and detained several far-right demonstrators.";
    let at = |w: &str| TEXT.find(w).unwrap();
    Instance::new("wikievents:calais:0", TEXT, Split::Test)
        .with_mention(EventMention::from_label(
            at("detained"),
            at("detained") + 8,
            "detained",
            "movement.transportperson",
        ))
        .with_mention(EventMention::from_label(
            at("clashes"),
            at("clashes") + 7,
            "clashes",
            "conflict.attack",
        ))
}

/// Arbitrary text biased towards the generation grammar's delimiters.
pub fn random_generation<R: Rng>(rng: &mut R) -> String {
    const PIECES: &[&str] = &[
        "|",
        " | ",
        "->",
        "-",
        ">",
        " ",
        "  ",
        "\t",
        "\n",
        "NONE",
        "none",
        "died",
        "took place",
        "life.die",
        "é",
        "日本",
        "\u{0}",
        "\u{200b}",
        "🙂",
        "a",
        "Z",
        "||",
        "->->",
        "|NONE|",
    ];
    let n = rng.random_range(0..16);
    let mut out = String::new();
    for _ in 0..n {
        if rng.random_bool(0.15) {
            out.push(rng.random::<char>());
        } else {
            out.push_str(PIECES.choose(rng).unwrap());
        }
    }
    out
}

/// Checks every structural guarantee of a parse result against its input.
pub fn check_parse_invariants(raw: &str, parsed: &edkit::ParsedPrediction) -> Result<(), String> {
    use edkit::TaskKind;
    let fields = raw.split('|').count();
    if parsed.items.len() > fields {
        return Err(format!("{} items from {fields} fields", parsed.items.len()));
    }
    if parsed.is_none && !parsed.items.is_empty() {
        return Err("is_none with items".into());
    }
    for issue in &parsed.diagnostics {
        if !raw.contains(&issue.fragment) {
            return Err(format!("fragment {:?} not in input", issue.fragment));
        }
    }
    for (i, item) in parsed.items.iter().enumerate() {
        if parsed.items[..i].contains(item) {
            return Err(format!("duplicate item {item:?}"));
        }
        let shape_ok = match parsed.task {
            TaskKind::ED => item.trigger.is_some() && item.type_label.is_some(),
            TaskKind::EI => item.trigger.is_some() && item.type_label.is_none(),
            TaskKind::EC => item.trigger.is_none() && item.type_label.is_some(),
        };
        if !shape_ok {
            return Err(format!(
                "item {item:?} has the wrong shape for {}",
                parsed.task
            ));
        }
        for part in item.trigger.iter().chain(item.type_label.iter()) {
            if part.is_empty() || part.trim() != part || part.contains('|') {
                return Err(format!("bad item part {part:?}"));
            }
            if parsed.task != TaskKind::ED && (part.contains("->") || part == "NONE") {
                return Err(format!("bad {} item {part:?}", parsed.task));
            }
        }
        if let Some(trigger) = &item.trigger {
            if parsed.task == TaskKind::ED && trigger.contains("->") {
                return Err(format!("trigger {trigger:?} contains an arrow"));
            }
        }
    }
    let has_none_field = raw.split('|').any(|f| f.trim() == "NONE");
    if parsed.is_none != (parsed.items.is_empty() && has_none_field) {
        return Err("is_none disagrees with the fields".into());
    }
    let mixed = parsed
        .diagnostics
        .iter()
        .any(|d| d.kind == edkit::parse::IssueKind::NoneMixedWithItems);
    if mixed != (has_none_field && !parsed.items.is_empty()) {
        return Err("none_mixed_with_items not reported consistently".into());
    }
    Ok(())
}
