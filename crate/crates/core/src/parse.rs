//! Tolerant parser for model generations.
//!
//! Parsing never fails: anything that does not fit the target grammar is
//! skipped and recorded as a [`ParseIssue`].

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reformulate::{TaskKind, NONE_LABEL, TYPE_ARROW};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    MissingArrow,
    EmptyItem,
    DuplicateItem,
    NoneMixedWithItems,
    ArrowInEiOrEc,
}

impl IssueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueKind::MissingArrow => "missing_arrow",
            IssueKind::EmptyItem => "empty_item",
            IssueKind::DuplicateItem => "duplicate_item",
            IssueKind::NoneMixedWithItems => "none_mixed_with_items",
            IssueKind::ArrowInEiOrEc => "arrow_in_ei_or_ec",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseIssue {
    pub kind: IssueKind,
    /// The offending field, verbatim from the generation.
    pub fragment: String,
}

/// One parsed item. ED items carry both fields, EI only a trigger, EC only a type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredictedItem {
    pub trigger: Option<String>,
    pub type_label: Option<String>,
}

impl PredictedItem {
    pub fn pair(trigger: &str, type_label: &str) -> Self {
        PredictedItem {
            trigger: Some(trigger.to_string()),
            type_label: Some(type_label.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedPrediction {
    pub instance_id: String,
    pub task: TaskKind,
    pub items: Vec<PredictedItem>,
    pub is_none: bool,
    pub diagnostics: Vec<ParseIssue>,
}

impl ParsedPrediction {
    /// (trigger, type) pairs of an ED prediction.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.items
            .iter()
            .filter_map(|i| Some((i.trigger.as_deref()?, i.type_label.as_deref()?)))
    }

    pub fn triggers(&self) -> impl Iterator<Item = &str> {
        self.items.iter().filter_map(|i| i.trigger.as_deref())
    }
}

pub fn parse_generation(raw: &str, task: TaskKind, instance_id: &str) -> ParsedPrediction {
    let mut items: Vec<PredictedItem> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut none_fields: Vec<&str> = Vec::new();
    let issue = |kind, fragment: &str| ParseIssue {
        kind,
        fragment: fragment.to_string(),
    };

    for field in raw.split('|') {
        let item = field.trim();
        if item.is_empty() {
            diagnostics.push(issue(IssueKind::EmptyItem, field));
            continue;
        }
        if item == NONE_LABEL {
            if !none_fields.is_empty() {
                diagnostics.push(issue(IssueKind::DuplicateItem, field));
            }
            none_fields.push(field);
            continue;
        }
        let parsed = match task {
            TaskKind::ED => match item.split_once(TYPE_ARROW) {
                None => {
                    diagnostics.push(issue(IssueKind::MissingArrow, field));
                    continue;
                }
                Some((trigger, ty)) => {
                    let (trigger, ty) = (trigger.trim(), ty.trim());
                    if trigger.is_empty() || ty.is_empty() {
                        diagnostics.push(issue(IssueKind::EmptyItem, field));
                        continue;
                    }
                    PredictedItem::pair(trigger, ty)
                }
            },
            TaskKind::EI | TaskKind::EC if item.contains(TYPE_ARROW) => {
                diagnostics.push(issue(IssueKind::ArrowInEiOrEc, field));
                continue;
            }
            TaskKind::EI => PredictedItem {
                trigger: Some(item.to_string()),
                type_label: None,
            },
            TaskKind::EC => PredictedItem {
                trigger: None,
                type_label: Some(item.to_string()),
            },
        };
        if items.contains(&parsed) {
            diagnostics.push(issue(IssueKind::DuplicateItem, field));
        } else {
            items.push(parsed);
        }
    }

    let is_none = items.is_empty() && !none_fields.is_empty();
    if !items.is_empty() {
        for field in none_fields {
            diagnostics.push(issue(IssueKind::NoneMixedWithItems, field));
        }
    }
    ParsedPrediction {
        instance_id: instance_id.to_string(),
        task,
        items,
        is_none,
        diagnostics,
    }
}

/// One line of a predictions file, as written by a model runner.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub instance_id: String,
    pub task: TaskKind,
    pub generation: String,
}

impl PredictionRecord {
    pub fn parse(&self) -> ParsedPrediction {
        parse_generation(&self.generation, self.task, &self.instance_id)
    }
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|source| Error::Record {
            path: path.to_path_buf(),
            line: idx + 1,
            source,
        })?;
        out.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(p: &ParsedPrediction) -> Vec<IssueKind> {
        p.diagnostics.iter().map(|d| d.kind).collect()
    }

    #[test]
    fn parses_two_ed_items() {
        let p = parse_generation(
            "detained->movement.transportperson | clashes->conflict.attack",
            TaskKind::ED,
            "x",
        );
        assert_eq!(
            p.items,
            vec![
                PredictedItem::pair("detained", "movement.transportperson"),
                PredictedItem::pair("clashes", "conflict.attack"),
            ]
        );
        assert!(p.diagnostics.is_empty());
        assert!(!p.is_none);
    }

    #[test]
    fn none_alone() {
        let p = parse_generation("NONE", TaskKind::ED, "x");
        assert!(p.is_none);
        assert!(p.items.is_empty());
        assert!(p.diagnostics.is_empty());
    }

    #[test]
    fn duplicates_and_missing_arrow() {
        let p = parse_generation(
            "died->life.die | died->life.die | broken",
            TaskKind::ED,
            "x",
        );
        assert_eq!(p.items, vec![PredictedItem::pair("died", "life.die")]);
        assert_eq!(
            kinds(&p),
            vec![IssueKind::DuplicateItem, IssueKind::MissingArrow]
        );
        assert_eq!(p.diagnostics[1].fragment, " broken");
    }

    #[test]
    fn none_mixed_with_items_keeps_items() {
        let p = parse_generation("NONE | died->life.die", TaskKind::ED, "x");
        assert!(!p.is_none);
        assert_eq!(p.items.len(), 1);
        assert_eq!(kinds(&p), vec![IssueKind::NoneMixedWithItems]);
    }

    #[test]
    fn first_arrow_splits() {
        let p = parse_generation("a->b->c", TaskKind::ED, "x");
        assert_eq!(p.items, vec![PredictedItem::pair("a", "b->c")]);
    }

    #[test]
    fn ei_and_ec_reject_arrows() {
        let p = parse_generation("took place | a->b", TaskKind::EI, "x");
        assert_eq!(p.triggers().collect::<Vec<_>>(), vec!["took place"]);
        assert_eq!(kinds(&p), vec![IssueKind::ArrowInEiOrEc]);
        let p = parse_generation("conflict.attack", TaskKind::EC, "x");
        assert_eq!(p.items[0].type_label.as_deref(), Some("conflict.attack"));
    }

    #[test]
    fn empty_items_and_case_preserved() {
        let p = parse_generation(" | Died->x ||", TaskKind::ED, "x");
        assert_eq!(p.items, vec![PredictedItem::pair("Died", "x")]);
        assert_eq!(
            p.diagnostics
                .iter()
                .filter(|d| d.kind == IssueKind::EmptyItem)
                .count(),
            3
        );
        let p = parse_generation("", TaskKind::ED, "x");
        assert!(!p.is_none);
        assert_eq!(kinds(&p), vec![IssueKind::EmptyItem]);
        let p = parse_generation("->x", TaskKind::ED, "x");
        assert_eq!(kinds(&p), vec![IssueKind::EmptyItem]);
    }
}
