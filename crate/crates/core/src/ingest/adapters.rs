//! Readers for the native layouts of RAMS, WikiEvents, MAVEN and MLEE.
//!
//! Argument and entity annotations are dropped. Sentence boundaries come from
//! the native files wherever they exist; only MLEE (plain text plus standoff)
//! needs segmenting here.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{CharOffsets, Corpus, EventMention, Granularity, Instance, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NativeFormat {
    Rams,
    WikiEvents,
    Maven,
    MleeStandoff,
}

impl NativeFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            NativeFormat::Rams => "rams",
            NativeFormat::WikiEvents => "wikievents",
            NativeFormat::Maven => "maven",
            NativeFormat::MleeStandoff => "mlee-standoff",
        }
    }
}

impl fmt::Display for NativeFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NativeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rams" => Ok(NativeFormat::Rams),
            "wikievents" => Ok(NativeFormat::WikiEvents),
            "maven" => Ok(NativeFormat::Maven),
            "mlee-standoff" | "mlee" => Ok(NativeFormat::MleeStandoff),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Side information gathered while adapting a native corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AdaptReport {
    pub documents: usize,
    pub duplicates_dropped: usize,
    /// Annotations that could not be represented, with a reason each.
    pub skipped: Vec<String>,
}

pub fn adapt(path: impl AsRef<Path>, format: NativeFormat) -> Result<Corpus> {
    adapt_with_report(path, format).map(|(corpus, _)| corpus)
}

pub fn adapt_with_report(
    path: impl AsRef<Path>,
    format: NativeFormat,
) -> Result<(Corpus, AdaptReport)> {
    let path = path.as_ref();
    let mut report = AdaptReport::default();
    let mut instances = Vec::new();
    match format {
        NativeFormat::MleeStandoff => {
            for (dir, split) in split_dirs(path)? {
                read_mlee_dir(&dir, split, &mut instances, &mut report)?;
            }
        }
        _ => {
            for (file, split) in split_files(path)? {
                let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
                for (idx, line) in text.lines().enumerate() {
                    if line.trim().is_empty() {
                        continue;
                    }
                    let ctx = LineCtx {
                        path: &file,
                        line_no: idx + 1,
                        line,
                    };
                    report.documents += 1;
                    match format {
                        NativeFormat::Rams => read_rams(&ctx, split, &mut instances)?,
                        NativeFormat::WikiEvents => read_wikievents(&ctx, split, &mut instances)?,
                        NativeFormat::Maven => read_maven(&ctx, split, &mut instances)?,
                        NativeFormat::MleeStandoff => unreachable!(),
                    }
                }
            }
        }
    }
    for inst in &mut instances {
        report.duplicates_dropped += dedup_mentions(inst);
    }
    if report.duplicates_dropped > 0 {
        warn!(
            "dropped {} duplicate annotation(s)",
            report.duplicates_dropped
        );
    }
    for reason in &report.skipped {
        warn!("skipped annotation: {reason}");
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| format.as_str().to_string());
    let corpus = Corpus::new(name, instances)?;
    Ok((corpus, report))
}

struct LineCtx<'a> {
    path: &'a Path,
    line_no: usize,
    line: &'a str,
}

impl LineCtx<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Native {
            path: self.path.to_path_buf(),
            message: format!("line {}: {}", self.line_no, message.into()),
            excerpt: excerpt(self.line),
        }
    }

    fn parse<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_str(self.line).map_err(|e| self.error(e.to_string()))
    }
}

fn excerpt(s: &str) -> String {
    const LIMIT: usize = 120;
    let mut out: String = s.chars().take(LIMIT).collect();
    if s.chars().count() > LIMIT {
        out.push_str("...");
    }
    out
}

fn split_from_path(path: &Path) -> Option<Split> {
    path.file_name()
        .and_then(|n| Split::infer(&n.to_string_lossy()))
}

/// JSON Lines inputs: a single file, or every split-named file in a directory.
fn split_files(path: &Path) -> Result<Vec<(PathBuf, Split)>> {
    if path.is_file() {
        let split = split_from_path(path).ok_or_else(|| Error::Native {
            path: path.to_path_buf(),
            message: "cannot infer split (train/dev/test) from file name".into(),
            excerpt: path.display().to_string(),
        })?;
        return Ok(vec![(path.to_path_buf(), split)]);
    }
    let mut files: Vec<(PathBuf, Split)> = read_dir_sorted(path)?
        .into_iter()
        .filter(|p| p.is_file())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("json" | "jsonl" | "jsonlines")
            )
        })
        .filter_map(|p| split_from_path(&p).map(|s| (p, s)))
        .collect();
    files.sort_by_key(|(p, s)| (*s, p.clone()));
    if files.is_empty() {
        return Err(Error::Native {
            path: path.to_path_buf(),
            message: "no split-named .json/.jsonl/.jsonlines files found".into(),
            excerpt: path.display().to_string(),
        });
    }
    Ok(files)
}

/// Standoff inputs: a directory with split-named subdirectories, or one split-named directory.
fn split_dirs(path: &Path) -> Result<Vec<(PathBuf, Split)>> {
    if !path.is_dir() {
        return Err(Error::Native {
            path: path.to_path_buf(),
            message: "standoff input must be a directory".into(),
            excerpt: path.display().to_string(),
        });
    }
    let mut subdirs: Vec<(PathBuf, Split)> = read_dir_sorted(path)?
        .into_iter()
        .filter(|p| p.is_dir())
        .filter_map(|p| split_from_path(&p).map(|s| (p, s)))
        .collect();
    if subdirs.is_empty() {
        let split = split_from_path(path).ok_or_else(|| Error::Native {
            path: path.to_path_buf(),
            message: "no train/dev/test subdirectories and the directory name names no split"
                .into(),
            excerpt: path.display().to_string(),
        })?;
        subdirs.push((path.to_path_buf(), split));
    }
    subdirs.sort_by_key(|(p, s)| (*s, p.clone()));
    Ok(subdirs)
}

fn read_dir_sorted(path: &Path) -> Result<Vec<PathBuf>> {
    let mut entries = fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))?;
    entries.sort();
    Ok(entries)
}

/// Keeps the first two dot-separated levels of a hierarchical label.
fn two_level(label: &str) -> &str {
    match label.match_indices('.').nth(1) {
        Some((idx, _)) => &label[..idx],
        None => label,
    }
}

fn dedup_mentions(inst: &mut Instance) -> usize {
    let before = inst.mentions.len();
    let mut seen = HashSet::new();
    inst.mentions
        .retain(|m| seen.insert((m.start, m.end, m.event_type.clone(), m.subtype.clone())));
    before - inst.mentions.len()
}

/// Joins tokens with single spaces and returns each token's character span.
fn join_tokens<S: AsRef<str>>(tokens: &[S]) -> (String, Vec<(usize, usize)>) {
    let mut text = String::new();
    let mut spans = Vec::with_capacity(tokens.len());
    let mut pos = 0;
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            text.push(' ');
            pos += 1;
        }
        let tok = tok.as_ref();
        let len = tok.chars().count();
        text.push_str(tok);
        spans.push((pos, pos + len));
        pos += len;
    }
    (text, spans)
}

fn mention_from_chars(
    text: &str,
    offsets: &CharOffsets,
    start: usize,
    end: usize,
    label: &str,
) -> Option<EventMention> {
    let trigger = offsets.slice(text, start, end)?;
    Some(EventMention::from_label(start, end, trigger, label))
}

// RAMS: one document per line, tokens grouped by sentence, trigger spans as
// inclusive document-level token indices.
/// First and last token index, then `[label, score]` pairs.
type RamsTrigger = (usize, usize, Vec<(String, serde_json::Value)>);

#[derive(Deserialize)]
struct RamsDoc {
    doc_key: String,
    sentences: Vec<Vec<String>>,
    #[serde(default)]
    evt_triggers: Vec<RamsTrigger>,
}

fn read_rams(ctx: &LineCtx<'_>, split: Split, out: &mut Vec<Instance>) -> Result<()> {
    let doc: RamsDoc = ctx.parse()?;
    let tokens: Vec<&str> = doc.sentences.iter().flatten().map(String::as_str).collect();
    let (text, spans) = join_tokens(&tokens);
    let offsets = CharOffsets::new(&text);
    let mut inst = Instance {
        id: doc.doc_key.clone(),
        text: String::new(),
        split,
        granularity: Granularity::Window,
        mentions: Vec::new(),
    };
    for (first, last, labels) in &doc.evt_triggers {
        if first > last || *last >= spans.len() {
            return Err(ctx.error(format!(
                "trigger token span [{first}, {last}] outside document of {} tokens",
                spans.len()
            )));
        }
        let (start, end) = (spans[*first].0, spans[*last].1);
        for (label, _) in labels {
            let mention = mention_from_chars(&text, &offsets, start, end, two_level(label))
                .ok_or_else(|| ctx.error("trigger span does not map onto the document text"))?;
            inst.mentions.push(mention);
        }
    }
    inst.text = text;
    out.push(inst);
    Ok(())
}

// WikiEvents: sentence tokens carry document-level character offsets; trigger
// token indices are document-level and end-exclusive.
/// Token text with document-level character offsets.
type WikiToken = (String, usize, usize);

#[derive(Deserialize)]
struct WikiDoc {
    doc_id: String,
    sentences: Vec<(Vec<WikiToken>, String)>,
    #[serde(default)]
    event_mentions: Vec<WikiEvent>,
}

#[derive(Deserialize)]
struct WikiEvent {
    event_type: String,
    trigger: WikiTrigger,
}

#[derive(Deserialize)]
struct WikiTrigger {
    start: usize,
    end: usize,
    text: String,
    sent_idx: usize,
}

fn read_wikievents(ctx: &LineCtx<'_>, split: Split, out: &mut Vec<Instance>) -> Result<()> {
    let doc: WikiDoc = ctx.parse()?;
    // document-level index of each sentence's first token
    let mut first_token = Vec::with_capacity(doc.sentences.len());
    let mut count = 0;
    for (tokens, _) in &doc.sentences {
        first_token.push(count);
        count += tokens.len();
    }
    let mut instances: Vec<Instance> = doc
        .sentences
        .iter()
        .enumerate()
        .map(|(idx, (_, text))| Instance {
            id: format!("{}:{}", doc.doc_id, idx),
            text: text.clone(),
            split,
            granularity: Granularity::Sentence,
            mentions: Vec::new(),
        })
        .collect();
    for ev in &doc.event_mentions {
        let t = &ev.trigger;
        let (tokens, sent_text) = doc.sentences.get(t.sent_idx).ok_or_else(|| {
            ctx.error(format!(
                "trigger {:?} names missing sentence {}",
                t.text, t.sent_idx
            ))
        })?;
        let base = first_token[t.sent_idx];
        if t.start < base || t.end <= t.start || t.end > base + tokens.len() {
            return Err(ctx.error(format!(
                "trigger {:?} tokens [{}, {}) fall outside sentence {}",
                t.text, t.start, t.end, t.sent_idx
            )));
        }
        let sent_base = tokens.first().map(|tok| tok.1).unwrap_or(0);
        let start = tokens[t.start - base].1 - sent_base;
        let end = tokens[t.end - 1 - base].2 - sent_base;
        let offsets = CharOffsets::new(sent_text);
        let mention =
            mention_from_chars(sent_text, &offsets, start, end, two_level(&ev.event_type))
                .ok_or_else(|| {
                    ctx.error(format!(
                        "trigger {:?} does not map onto sentence {}",
                        t.text, t.sent_idx
                    ))
                })?;
        if mention.trigger_text != t.text {
            return Err(ctx.error(format!(
                "trigger text {:?} does not match sentence slice {:?}",
                t.text, mention.trigger_text
            )));
        }
        instances[t.sent_idx].mentions.push(mention);
    }
    out.extend(instances);
    Ok(())
}

// MAVEN: per-sentence token lists, trigger offsets are sentence-level token
// indices [start, end). Unlabelled test files have no "events".
#[derive(Deserialize)]
struct MavenDoc {
    id: String,
    content: Vec<MavenSentence>,
    #[serde(default)]
    events: Vec<MavenEvent>,
}

#[derive(Deserialize)]
struct MavenSentence {
    sentence: String,
    tokens: Vec<String>,
}

#[derive(Deserialize)]
struct MavenEvent {
    #[serde(rename = "type")]
    event_type: String,
    mention: Vec<MavenMention>,
}

#[derive(Deserialize)]
struct MavenMention {
    sent_id: usize,
    offset: (usize, usize),
}

/// Locates each token in the sentence by forward scanning.
fn locate_tokens(sentence: &str, tokens: &[String]) -> Option<Vec<(usize, usize)>> {
    let offsets = CharOffsets::new(sentence);
    let mut spans = Vec::with_capacity(tokens.len());
    let mut byte_pos = 0;
    for tok in tokens {
        let found = sentence[byte_pos..].find(tok.as_str())? + byte_pos;
        let start = offsets.char_at_byte(found)?;
        spans.push((start, start + tok.chars().count()));
        byte_pos = found + tok.len();
    }
    Some(spans)
}

fn read_maven(ctx: &LineCtx<'_>, split: Split, out: &mut Vec<Instance>) -> Result<()> {
    let doc: MavenDoc = ctx.parse()?;
    let mut token_spans = Vec::with_capacity(doc.content.len());
    for (idx, sent) in doc.content.iter().enumerate() {
        let spans = locate_tokens(&sent.sentence, &sent.tokens).ok_or_else(|| {
            ctx.error(format!(
                "tokens of sentence {idx} cannot be located in its text"
            ))
        })?;
        token_spans.push(spans);
    }
    let mut instances: Vec<Instance> = doc
        .content
        .iter()
        .enumerate()
        .map(|(idx, sent)| Instance {
            id: format!("{}:{}", doc.id, idx),
            text: sent.sentence.clone(),
            split,
            granularity: Granularity::Sentence,
            mentions: Vec::new(),
        })
        .collect();
    for ev in &doc.events {
        for m in &ev.mention {
            let spans = token_spans.get(m.sent_id).ok_or_else(|| {
                ctx.error(format!("mention names missing sentence {}", m.sent_id))
            })?;
            let (first, end) = m.offset;
            if first >= end || end > spans.len() {
                return Err(ctx.error(format!(
                    "mention offset [{first}, {end}) outside sentence {} of {} tokens",
                    m.sent_id,
                    spans.len()
                )));
            }
            let inst = &mut instances[m.sent_id];
            let offsets = CharOffsets::new(&inst.text);
            let (start, end) = (spans[first].0, spans[end - 1].1);
            let trigger = offsets
                .slice(&inst.text, start, end)
                .unwrap_or_default()
                .to_string();
            inst.mentions.push(EventMention {
                start,
                end,
                trigger_text: trigger,
                event_type: ev.event_type.clone(),
                subtype: None,
            });
        }
    }
    out.extend(instances);
    Ok(())
}

// MLEE: brat standoff. `.txt` holds the abstract, `.a2` holds trigger
// text-bounds (T lines) and events (E lines) whose first argument names the
// trigger.
fn read_mlee_dir(
    dir: &Path,
    split: Split,
    out: &mut Vec<Instance>,
    report: &mut AdaptReport,
) -> Result<()> {
    for txt_path in read_dir_sorted(dir)?
        .into_iter()
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("txt"))
    {
        let a2_path = txt_path.with_extension("a2");
        let text = fs::read_to_string(&txt_path).map_err(|e| Error::io(&txt_path, e))?;
        let a2 = match fs::read_to_string(&a2_path) {
            Ok(s) => s,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => String::new(),
            Err(e) => return Err(Error::io(&a2_path, e)),
        };
        report.documents += 1;
        let triggers = parse_standoff_triggers(&a2_path, &a2, report)?;
        let stem = txt_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.extend(standoff_instances(
            &stem, &text, &triggers, split, &a2_path,
        )?);
    }
    Ok(())
}

#[derive(Debug, Clone)]
struct StandoffTrigger {
    start: usize,
    end: usize,
    label: String,
}

fn parse_standoff_triggers(
    path: &Path,
    a2: &str,
    report: &mut AdaptReport,
) -> Result<Vec<StandoffTrigger>> {
    let mut spans: HashMap<&str, (usize, usize)> = HashMap::new();
    let mut discontinuous: HashSet<&str> = HashSet::new();
    let mut events: Vec<(&str, &str)> = Vec::new();
    for (idx, line) in a2.lines().enumerate() {
        let bad = |message: &str| Error::Native {
            path: path.to_path_buf(),
            message: format!("line {}: {message}", idx + 1),
            excerpt: excerpt(line),
        };
        if line.starts_with('T') {
            let mut fields = line.splitn(3, '\t');
            let id = fields.next().unwrap_or_default();
            let meta = fields
                .next()
                .ok_or_else(|| bad("text-bound without type and offsets"))?;
            let mut parts = meta.split(' ');
            let _ty = parts.next();
            let rest: Vec<&str> = parts.collect();
            if rest.iter().any(|p| p.contains(';')) {
                discontinuous.insert(id);
                continue;
            }
            let [start, end] = rest.as_slice() else {
                return Err(bad("expected `Type start end`"));
            };
            let start = start
                .parse()
                .map_err(|_| bad("start offset is not a number"))?;
            let end = end.parse().map_err(|_| bad("end offset is not a number"))?;
            spans.insert(id, (start, end));
        } else if line.starts_with('E') {
            let mut fields = line.splitn(2, '\t');
            let _id = fields.next();
            let args = fields
                .next()
                .ok_or_else(|| bad("event without arguments"))?;
            let head = args.split(' ').next().unwrap_or_default();
            let (ty, trig) = head
                .split_once(':')
                .ok_or_else(|| bad("event head is not `Type:Tid`"))?;
            events.push((ty, trig));
        }
    }
    let mut out = Vec::new();
    for (ty, trig) in events {
        match spans.get(trig) {
            Some(&(start, end)) => out.push(StandoffTrigger {
                start,
                end,
                label: ty.to_string(),
            }),
            None if discontinuous.contains(trig) => report
                .skipped
                .push(format!("{}: discontinuous trigger {trig}", path.display())),
            None => {
                return Err(Error::Native {
                    path: path.to_path_buf(),
                    message: format!("event refers to unknown trigger {trig}"),
                    excerpt: format!("{ty}:{trig}"),
                })
            }
        }
    }
    Ok(out)
}

/// Sentence boundaries (character offsets) for plain text: line breaks, and
/// `.`, `!` or `?` followed by whitespace and an uppercase letter or digit.
pub(crate) fn segment_sentences(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut bounds = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let mut cut = None;
        if c == '\n' {
            cut = Some((i, i + 1));
        } else if matches!(c, '.' | '!' | '?') {
            let mut j = i + 1;
            while j < chars.len() && chars[j] == ' ' {
                j += 1;
            }
            if j > i + 1
                && j < chars.len()
                && (chars[j].is_uppercase() || chars[j].is_ascii_digit())
            {
                cut = Some((i + 1, j));
            }
        }
        if let Some((end, next)) = cut {
            bounds.push((start, end));
            start = next;
            i = next;
        } else {
            i += 1;
        }
    }
    bounds.push((start, chars.len()));
    bounds
        .into_iter()
        .filter_map(|(s, e)| {
            // trim surrounding whitespace
            let s = (s..e).find(|&k| !chars[k].is_whitespace())?;
            let e = (s..e).rev().find(|&k| !chars[k].is_whitespace())? + 1;
            Some((s, e))
        })
        .collect()
}

fn standoff_instances(
    stem: &str,
    text: &str,
    triggers: &[StandoffTrigger],
    split: Split,
    a2_path: &Path,
) -> Result<Vec<Instance>> {
    let offsets = CharOffsets::new(text);
    // merge sentences that a trigger straddles
    let mut sentences: Vec<(usize, usize)> = Vec::new();
    for (s, e) in segment_sentences(text) {
        match sentences.last_mut() {
            Some(last) if triggers.iter().any(|t| t.start < last.1 && t.end > s) => last.1 = e,
            _ => sentences.push((s, e)),
        }
    }
    let mut by_sentence: BTreeMap<usize, Vec<EventMention>> = BTreeMap::new();
    for t in triggers {
        let idx = sentences
            .iter()
            .position(|&(s, e)| t.start >= s && t.end <= e)
            .ok_or_else(|| Error::Native {
                path: a2_path.to_path_buf(),
                message: format!("trigger {}..{} lies outside every sentence", t.start, t.end),
                excerpt: t.label.clone(),
            })?;
        let base = sentences[idx].0;
        let trigger = offsets
            .slice(text, t.start, t.end)
            .ok_or_else(|| Error::Native {
                path: a2_path.to_path_buf(),
                message: format!("trigger {}..{} is out of bounds", t.start, t.end),
                excerpt: t.label.clone(),
            })?;
        by_sentence.entry(idx).or_default().push(EventMention {
            start: t.start - base,
            end: t.end - base,
            trigger_text: trigger.to_string(),
            event_type: t.label.clone(),
            subtype: None,
        });
    }
    Ok(sentences
        .iter()
        .enumerate()
        .map(|(idx, &(s, e))| Instance {
            id: format!("{stem}:{idx}"),
            text: offsets.slice(text, s, e).unwrap_or_default().to_string(),
            split,
            granularity: Granularity::Sentence,
            mentions: by_sentence.remove(&idx).unwrap_or_default(),
        })
        .collect())
}
