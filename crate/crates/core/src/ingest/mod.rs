//! Canonical corpus representation and readers.
//!
//! Every corpus is normalised into [`Instance`] records with character-level
//! trigger spans. Offsets count Unicode scalar values, never bytes, so a
//! record written by any UTF-8 aware tool round-trips unchanged.

mod adapters;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, InvalidInstance, Result};

pub use adapters::{adapt, adapt_with_report, AdaptReport, NativeFormat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }

    /// Guess a split from a native file or directory name.
    pub fn infer(name: &str) -> Option<Split> {
        let name = name.to_ascii_lowercase();
        if name.contains("train") {
            Some(Split::Train)
        } else if name.contains("dev") || name.contains("valid") {
            Some(Split::Dev)
        } else if name.contains("test") {
            Some(Split::Test)
        } else {
            None
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Sentence,
    Window,
}

/// One annotated trigger occurrence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventMention {
    pub start: usize,
    pub end: usize,
    #[serde(rename = "trigger")]
    pub trigger_text: String,
    #[serde(rename = "type")]
    pub event_type: String,
    #[serde(default)]
    pub subtype: Option<String>,
}

impl EventMention {
    pub fn new(start: usize, end: usize, trigger: &str, event_type: &str) -> Self {
        EventMention {
            start,
            end,
            trigger_text: trigger.to_string(),
            event_type: event_type.to_string(),
            subtype: None,
        }
    }

    pub fn with_subtype(mut self, subtype: &str) -> Self {
        self.subtype = Some(subtype.to_string());
        self
    }

    /// Builds a mention from a possibly two-level label, splitting on the first dot.
    pub fn from_label(start: usize, end: usize, trigger: &str, label: &str) -> Self {
        let (event_type, subtype) = split_type_label(label);
        EventMention {
            start,
            end,
            trigger_text: trigger.to_string(),
            event_type: event_type.to_string(),
            subtype: subtype.map(str::to_string),
        }
    }

    /// The label used in targets and metrics: `type.subtype` or bare `type`.
    pub fn type_label(&self) -> String {
        match &self.subtype {
            Some(sub) => format!("{}.{}", self.event_type, sub),
            None => self.event_type.clone(),
        }
    }

    pub fn is_multi_word(&self) -> bool {
        is_multi_word(&self.trigger_text)
    }
}

/// Splits `type.subtype` on the first dot. An empty subtype is treated as absent.
pub fn split_type_label(label: &str) -> (&str, Option<&str>) {
    match label.split_once('.') {
        Some((ty, sub)) if !sub.is_empty() => (ty, Some(sub)),
        Some((ty, _)) => (ty, None),
        None => (label, None),
    }
}

/// A trigger is multi-word when it contains whitespace between non-space characters.
pub fn is_multi_word(trigger: &str) -> bool {
    trigger.trim().contains(char::is_whitespace)
}

/// One evaluation unit: a sentence or a multi-sentence window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub text: String,
    pub split: Split,
    pub granularity: Granularity,
    #[serde(default)]
    pub mentions: Vec<EventMention>,
}

impl Instance {
    pub fn new(id: &str, text: &str, split: Split) -> Self {
        Instance {
            id: id.to_string(),
            text: text.to_string(),
            split,
            granularity: Granularity::Sentence,
            mentions: Vec::new(),
        }
    }

    pub fn with_mention(mut self, mention: EventMention) -> Self {
        self.mentions.push(mention);
        self
    }

    pub fn is_negative(&self) -> bool {
        self.mentions.is_empty()
    }

    /// Checks span bounds, slice equality, non-empty types and duplicate annotations.
    pub fn validate(&self) -> Result<(), InvalidInstance> {
        if self.id.is_empty() {
            return Err(InvalidInstance::EmptyId);
        }
        let offsets = CharOffsets::new(&self.text);
        let mut seen = HashSet::new();
        for m in &self.mentions {
            if m.start >= m.end {
                return Err(InvalidInstance::EmptySpan {
                    start: m.start,
                    end: m.end,
                });
            }
            let slice =
                offsets
                    .slice(&self.text, m.start, m.end)
                    .ok_or(InvalidInstance::OutOfBounds {
                        start: m.start,
                        end: m.end,
                        len: offsets.len(),
                    })?;
            if slice != m.trigger_text {
                let problem = if slice.to_lowercase() == m.trigger_text.to_lowercase() {
                    InvalidInstance::CaseMismatch {
                        start: m.start,
                        end: m.end,
                        trigger: m.trigger_text.clone(),
                        slice: slice.to_string(),
                    }
                } else {
                    InvalidInstance::SpanMismatch {
                        start: m.start,
                        end: m.end,
                        trigger: m.trigger_text.clone(),
                        slice: slice.to_string(),
                    }
                };
                return Err(problem);
            }
            if m.event_type.is_empty() {
                return Err(InvalidInstance::EmptyType {
                    start: m.start,
                    end: m.end,
                });
            }
            if !seen.insert((m.start, m.end, &m.event_type, &m.subtype)) {
                return Err(InvalidInstance::DuplicateMention {
                    start: m.start,
                    end: m.end,
                    label: m.type_label(),
                });
            }
        }
        Ok(())
    }
}

/// Maps character offsets to byte offsets for one string.
#[derive(Debug, Clone)]
pub struct CharOffsets {
    bytes: Vec<usize>,
}

impl CharOffsets {
    pub fn new(text: &str) -> Self {
        let mut bytes: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        bytes.push(text.len());
        CharOffsets { bytes }
    }

    /// Length of the text in characters.
    pub fn len(&self) -> usize {
        self.bytes.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn byte(&self, char_offset: usize) -> Option<usize> {
        self.bytes.get(char_offset).copied()
    }

    /// Character offset of a byte position that lies on a char boundary.
    pub fn char_at_byte(&self, byte: usize) -> Option<usize> {
        self.bytes.binary_search(&byte).ok()
    }

    pub fn slice<'a>(&self, text: &'a str, start: usize, end: usize) -> Option<&'a str> {
        if start > end {
            return None;
        }
        Some(&text[self.byte(start)?..self.byte(end)?])
    }
}

/// A validated, immutable collection of instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    name: String,
    instances: Vec<Instance>,
    type_inventory: BTreeSet<String>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, instances: Vec<Instance>) -> Result<Self> {
        let mut ids = HashSet::new();
        for inst in &instances {
            inst.validate().map_err(|problem| Error::Instance {
                location: "corpus".to_string(),
                id: inst.id.clone(),
                problem,
            })?;
            if !ids.insert(inst.id.as_str()) {
                return Err(Error::DuplicateId(inst.id.clone()));
            }
        }
        Ok(Self::from_validated(name.into(), instances))
    }

    fn from_validated(name: String, instances: Vec<Instance>) -> Self {
        let type_inventory = instances
            .iter()
            .filter(|i| i.split == Split::Train)
            .flat_map(|i| i.mentions.iter().map(EventMention::type_label))
            .collect();
        Corpus {
            name,
            instances,
            type_inventory,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    /// Rendered event types observed in the train split.
    pub fn type_inventory(&self) -> &BTreeSet<String> {
        &self.type_inventory
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(move |i| i.split == split)
    }

    pub fn get(&self, id: &str) -> Option<&Instance> {
        self.instances.iter().find(|i| i.id == id)
    }

    pub fn into_instances(self) -> Vec<Instance> {
        self.instances
    }
}

/// Keeps only instances with at least one mention.
pub fn filter_positive(corpus: &Corpus) -> Corpus {
    let kept = corpus
        .instances
        .iter()
        .filter(|i| !i.is_negative())
        .cloned()
        .collect();
    Corpus::from_validated(corpus.name.clone(), kept)
}

/// Reads a canonical JSON Lines corpus. The corpus is named after the file stem.
pub fn load_canonical(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut instances = Vec::new();
    let mut ids = HashSet::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let inst: Instance = serde_json::from_str(&line).map_err(|source| Error::Record {
            path: path.to_path_buf(),
            line: line_no,
            source,
        })?;
        inst.validate().map_err(|problem| Error::Instance {
            location: format!("{}:{}", path.display(), line_no),
            id: inst.id.clone(),
            problem,
        })?;
        if !ids.insert(inst.id.clone()) {
            return Err(Error::DuplicateId(inst.id));
        }
        instances.push(inst);
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Corpus::from_validated(name, instances))
}

/// Writes the corpus as canonical JSON Lines, one instance per line.
pub fn write_canonical(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_jsonl(&mut out, corpus.instances()).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn write_jsonl<W: Write, T: Serialize>(
    out: &mut W,
    records: &[T],
) -> std::io::Result<()> {
    for rec in records {
        serde_json::to_writer(&mut *out, rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}
