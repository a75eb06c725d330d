//! Gold annotations rendered as the three delimited target strings.
//!
//! ```text
//! EI: T1 | T2 | ...
//! EC: E1 | E2 | ...
//! ED: T1->E1 | T2->E2 | ...
//! ```
//!
//! An instance without events renders as `NONE` for every task.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Instance;

pub const NONE_LABEL: &str = "NONE";
pub const ITEM_SEPARATOR: &str = " | ";
pub const TYPE_ARROW: &str = "->";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    EI,
    EC,
    ED,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::EI, TaskKind::EC, TaskKind::ED];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::EI => "EI",
            TaskKind::EC => "EC",
            TaskKind::ED => "ED",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EI" => Ok(TaskKind::EI),
            "EC" => Ok(TaskKind::EC),
            "ED" => Ok(TaskKind::ED),
            other => Err(format!("unknown task {other:?} (expected EI, EC or ED)")),
        }
    }
}

/// Order in which distinct triggers appear in a target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemOrder {
    /// Order of first appearance in the instance's mention list.
    #[default]
    Annotation,
    /// Order of first character offset in the text.
    Offset,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TargetString {
    pub task: TaskKind,
    pub text: String,
}

impl TargetString {
    fn from_items(task: TaskKind, items: Vec<String>) -> Self {
        let text = if items.is_empty() {
            NONE_LABEL.to_string()
        } else {
            items.join(ITEM_SEPARATOR)
        };
        TargetString { task, text }
    }

    pub fn is_none(&self) -> bool {
        self.text == NONE_LABEL
    }
}

impl fmt::Display for TargetString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

/// Rejects labels the target grammar cannot carry unambiguously.
fn check_label(instance: &Instance, what: &str, label: &str) -> Result<()> {
    let problem = if label.is_empty() {
        Some("is empty")
    } else if label.contains('|') {
        Some("contains the item separator `|`")
    } else if label.contains(TYPE_ARROW) {
        Some("contains the type delimiter `->`")
    } else if label.trim() != label {
        Some("has leading or trailing whitespace")
    } else if label == NONE_LABEL {
        Some("is the reserved label NONE")
    } else {
        None
    };
    match problem {
        Some(p) => Err(Error::Grammar {
            instance_id: instance.id.clone(),
            message: format!("{what} {label:?} {p}"),
        }),
        None => Ok(()),
    }
}

/// Distinct (trigger, type) pairs grouped by trigger, triggers in `order`,
/// types in annotation order.
fn ordered_pairs(instance: &Instance, order: ItemOrder) -> Result<Vec<(String, Vec<String>)>> {
    let mut mentions: Vec<_> = instance.mentions.iter().collect();
    if order == ItemOrder::Offset {
        mentions.sort_by_key(|m| (m.start, m.end));
    }
    let mut grouped: Vec<(String, Vec<String>)> = Vec::new();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for m in &mentions {
        check_label(instance, "trigger", &m.trigger_text)?;
        let label = m.type_label();
        check_label(instance, "event type", &label)?;
        if !index.contains_key(m.trigger_text.as_str()) {
            index.insert(m.trigger_text.as_str(), grouped.len());
            grouped.push((m.trigger_text.clone(), Vec::new()));
        }
    }
    // types keep annotation order even when triggers are offset-ordered
    for m in &instance.mentions {
        let slot = index[m.trigger_text.as_str()];
        let label = m.type_label();
        if !grouped[slot].1.contains(&label) {
            grouped[slot].1.push(label);
        }
    }
    Ok(grouped)
}

pub fn make_ei_target(instance: &Instance, order: ItemOrder) -> Result<TargetString> {
    let items = ordered_pairs(instance, order)?
        .into_iter()
        .map(|(t, _)| t)
        .collect();
    Ok(TargetString::from_items(TaskKind::EI, items))
}

pub fn make_ec_target(instance: &Instance, order: ItemOrder) -> Result<TargetString> {
    let mut items: Vec<String> = Vec::new();
    for (_, types) in ordered_pairs(instance, order)? {
        for ty in types {
            if !items.contains(&ty) {
                items.push(ty);
            }
        }
    }
    Ok(TargetString::from_items(TaskKind::EC, items))
}

pub fn make_ed_target(instance: &Instance, order: ItemOrder) -> Result<TargetString> {
    let items = ordered_pairs(instance, order)?
        .into_iter()
        .flat_map(|(trigger, types)| {
            types
                .into_iter()
                .map(move |ty| format!("{trigger}{TYPE_ARROW}{ty}"))
        })
        .collect();
    Ok(TargetString::from_items(TaskKind::ED, items))
}

pub fn make_target(instance: &Instance, task: TaskKind, order: ItemOrder) -> Result<TargetString> {
    match task {
        TaskKind::EI => make_ei_target(instance, order),
        TaskKind::EC => make_ec_target(instance, order),
        TaskKind::ED => make_ed_target(instance, order),
    }
}

/// All three targets for one instance.
pub fn targets_for(
    instance: &Instance,
    order: ItemOrder,
) -> Result<BTreeMap<TaskKind, TargetString>> {
    TaskKind::ALL
        .iter()
        .map(|&task| Ok((task, make_target(instance, task, order)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{EventMention, Split};

    const CALAIS: &str = "Police in Calais have dispersed a rowdy anti-migrant protest with tear gas after clashes with protesters and detained several far-right demonstrators.";

    fn calais() -> Instance {
        let det = CALAIS.find("detained").unwrap();
        let cla = CALAIS.find("clashes").unwrap();
        Instance::new("wiki:0", CALAIS, Split::Test)
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

    fn purchasing() -> Instance {
        Instance::new("p", "They were purchasing arms.", Split::Train)
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
            ))
    }

    #[test]
    fn calais_targets() {
        let i = calais();
        assert_eq!(
            make_ed_target(&i, ItemOrder::Annotation).unwrap().text,
            "detained->movement.transportperson | clashes->conflict.attack"
        );
        assert_eq!(
            make_ei_target(&i, ItemOrder::Annotation).unwrap().text,
            "detained | clashes"
        );
        assert_eq!(
            make_ec_target(&i, ItemOrder::Annotation).unwrap().text,
            "movement.transportperson | conflict.attack"
        );
        assert_eq!(
            make_ei_target(&i, ItemOrder::Offset).unwrap().text,
            "clashes | detained"
        );
    }

    #[test]
    fn negative_instance_is_none_everywhere() {
        let i = Instance::new("n", "Nothing happened.", Split::Train);
        for t in targets_for(&i, ItemOrder::Annotation).unwrap().values() {
            assert_eq!(t.text, "NONE");
        }
    }

    #[test]
    fn multi_class_trigger() {
        let i = purchasing();
        assert_eq!(
            make_ei_target(&i, ItemOrder::Annotation).unwrap().text,
            "purchasing"
        );
        assert_eq!(
            make_ec_target(&i, ItemOrder::Annotation).unwrap().text,
            "transaction.transferownership | transaction.transfermoney"
        );
        assert_eq!(
            make_ed_target(&i, ItemOrder::Annotation).unwrap().text,
            "purchasing->transaction.transferownership | purchasing->transaction.transfermoney"
        );
    }

    #[test]
    fn repeated_trigger_occurrences_emit_once() {
        let i = Instance::new("r", "died and died", Split::Train)
            .with_mention(EventMention::new(0, 4, "died", "die"))
            .with_mention(EventMention::new(9, 13, "died", "die"));
        assert_eq!(
            make_ed_target(&i, ItemOrder::Annotation).unwrap().text,
            "died->die"
        );
    }

    #[test]
    fn grammar_breaking_labels_are_rejected() {
        let pipe = Instance::new("x", "a|b", Split::Train)
            .with_mention(EventMention::new(0, 3, "a|b", "t"));
        assert!(matches!(
            make_ei_target(&pipe, ItemOrder::Annotation),
            Err(Error::Grammar { .. })
        ));
        let arrow = Instance::new("x", "a->b", Split::Train)
            .with_mention(EventMention::new(0, 4, "a->b", "t"));
        assert!(make_ed_target(&arrow, ItemOrder::Annotation).is_err());
        let none = Instance::new("x", "NONE", Split::Train)
            .with_mention(EventMention::new(0, 4, "NONE", "t"));
        assert!(make_ed_target(&none, ItemOrder::Annotation).is_err());
        let padded =
            Instance::new("x", " a", Split::Train).with_mention(EventMention::new(0, 2, " a", "t"));
        assert!(make_ed_target(&padded, ItemOrder::Annotation).is_err());
    }
}
