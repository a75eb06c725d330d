//! Projection of predicted and gold triggers onto token-level labels.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{CharOffsets, Instance};
use crate::parse::ParsedPrediction;
use crate::reformulate::TaskKind;

pub const OUTSIDE: &str = "O";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub start: usize,
    pub end: usize,
}

fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '“' | '”' | '‘' | '’' | '«' | '»' | '–' | '—' | '…' | '¿' | '¡' | '·' | '„'
        )
}

/// Whitespace tokenisation with leading and trailing punctuation split off
/// one character at a time. Offsets are character offsets into `text`.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut push = |s: usize, e: usize| {
        tokens.push(Token {
            text: chars[s..e].iter().collect(),
            start: s,
            end: e,
        })
    };
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        let (mut s, mut e) = (start, i);
        while s < e && is_punct(chars[s]) {
            push(s, s + 1);
            s += 1;
        }
        let mut trailing = Vec::new();
        while e > s && is_punct(chars[e - 1]) {
            trailing.push(e - 1);
            e -= 1;
        }
        if s < e {
            push(s, e);
        }
        for p in trailing.into_iter().rev() {
            push(p, p + 1);
        }
    }
    tokens
}

/// Token-level labels for one instance. A token may carry several labels
/// (multi-class triggers); an empty set means `O`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenLabeling {
    pub instance_id: String,
    pub tokens: Vec<Token>,
    pub labels: Vec<BTreeSet<String>>,
}

impl TokenLabeling {
    fn empty(instance_id: &str, text: &str) -> Self {
        let tokens = tokenize(text);
        let labels = vec![BTreeSet::new(); tokens.len()];
        TokenLabeling {
            instance_id: instance_id.to_string(),
            tokens,
            labels,
        }
    }

    /// Single-label view: the smallest label of each token, or `O`.
    pub fn single_labels(&self) -> Vec<&str> {
        self.labels
            .iter()
            .map(|set| set.iter().next().map_or(OUTSIDE, String::as_str))
            .collect()
    }
}

/// How to label a predicted trigger string that occurs more than once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OccurrencePolicy {
    #[default]
    All,
    First,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub labeling: TokenLabeling,
    /// Predicted pairs whose trigger matches nowhere in the text.
    pub hallucinations: usize,
}

/// Token boundary lookup for one text.
struct Boundaries {
    offsets: CharOffsets,
    starts: HashMap<usize, usize>,
    ends: HashMap<usize, usize>,
}

impl Boundaries {
    fn new(text: &str, tokens: &[Token]) -> Self {
        Boundaries {
            offsets: CharOffsets::new(text),
            starts: tokens
                .iter()
                .enumerate()
                .map(|(i, t)| (t.start, i))
                .collect(),
            ends: tokens.iter().enumerate().map(|(i, t)| (t.end, i)).collect(),
        }
    }

    /// Token ranges (inclusive) of every case-exact, boundary-aligned
    /// occurrence of `needle`, overlapping occurrences included.
    fn occurrences(&self, text: &str, needle: &str) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        if needle.is_empty() {
            return out;
        }
        let needle_chars = needle.chars().count();
        let mut from = 0;
        while let Some(found) = text[from..].find(needle) {
            let byte = from + found;
            if let Some(start) = self.offsets.char_at_byte(byte) {
                let end = start + needle_chars;
                if let (Some(&a), Some(&b)) = (self.starts.get(&start), self.ends.get(&end)) {
                    out.push((a, b));
                }
            }
            from = byte + text[byte..].chars().next().map_or(1, char::len_utf8);
        }
        out
    }
}

pub fn project(
    prediction: &ParsedPrediction,
    text: &str,
    policy: OccurrencePolicy,
) -> Result<Projection> {
    if prediction.task != TaskKind::ED {
        return Err(Error::WrongTask {
            expected: TaskKind::ED,
            found: prediction.task,
        });
    }
    let mut labeling = TokenLabeling::empty(&prediction.instance_id, text);
    let bounds = Boundaries::new(text, &labeling.tokens);
    let mut hallucinations = 0;
    for (trigger, ty) in prediction.pairs() {
        let mut found = bounds.occurrences(text, trigger);
        if found.is_empty() {
            hallucinations += 1;
            continue;
        }
        if policy == OccurrencePolicy::First {
            found.truncate(1);
        }
        for (a, b) in found {
            for set in &mut labeling.labels[a..=b] {
                set.insert(ty.to_string());
            }
        }
    }
    Ok(Projection {
        labeling,
        hallucinations,
    })
}

/// Gold labels straight from mention offsets; every token overlapping a
/// mention span receives its type.
pub fn gold_labeling(instance: &Instance) -> TokenLabeling {
    let mut labeling = TokenLabeling::empty(&instance.id, &instance.text);
    for m in &instance.mentions {
        let label = m.type_label();
        for (tok, set) in labeling.tokens.iter().zip(labeling.labels.iter_mut()) {
            if tok.start < m.end && tok.end > m.start {
                set.insert(label.clone());
            }
        }
    }
    labeling
}

/// True when the trigger strings of an instance cannot be localised from
/// text alone: a trigger string occurs (token-aligned) at places it is not
/// annotated, or its annotated occurrences carry different type sets.
pub fn is_ambiguous(instance: &Instance) -> bool {
    let tokens = tokenize(&instance.text);
    let bounds = Boundaries::new(&instance.text, &tokens);
    let mut spans: BTreeMap<&str, BTreeMap<(usize, usize), BTreeSet<String>>> = BTreeMap::new();
    for m in &instance.mentions {
        spans
            .entry(&m.trigger_text)
            .or_default()
            .entry((m.start, m.end))
            .or_default()
            .insert(m.type_label());
    }
    spans.iter().any(|(trigger, by_span)| {
        let occurrences = bounds.occurrences(&instance.text, trigger);
        let annotated: BTreeSet<(usize, usize)> = by_span
            .keys()
            .filter_map(|&(s, e)| Some((*bounds.starts.get(&s)?, *bounds.ends.get(&e)?)))
            .collect();
        let found: BTreeSet<(usize, usize)> = occurrences.into_iter().collect();
        let mut type_sets = by_span.values();
        let first = type_sets.next();
        found != annotated
            || annotated.len() != by_span.len()
            || type_sets.any(|t| Some(t) != first)
    })
}
