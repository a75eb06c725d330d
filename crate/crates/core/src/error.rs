use std::path::PathBuf;

use thiserror::Error;

use crate::reformulate::TaskKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A violated [`Instance`](crate::Instance) or mention invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InvalidInstance {
    #[error("instance id is empty")]
    EmptyId,
    #[error("mention {start}..{end} is empty or reversed")]
    EmptySpan { start: usize, end: usize },
    #[error("mention {start}..{end} is out of bounds for text of {len} characters")]
    OutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },
    #[error(
        "mention {start}..{end}: trigger {trigger:?} differs in case from the text slice {slice:?}"
    )]
    CaseMismatch {
        start: usize,
        end: usize,
        trigger: String,
        slice: String,
    },
    #[error("mention {start}..{end}: trigger {trigger:?} does not match the text slice {slice:?}")]
    SpanMismatch {
        start: usize,
        end: usize,
        trigger: String,
        slice: String,
    },
    #[error("mention {start}..{end} has an empty event type")]
    EmptyType { start: usize, end: usize },
    #[error("mention {start}..{end} with type {label:?} is annotated twice")]
    DuplicateMention {
        start: usize,
        end: usize,
        label: String,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: malformed record: {source}", path.display())]
    Record {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{location}: instance {id:?}: {problem}")]
    Instance {
        location: String,
        id: String,
        problem: InvalidInstance,
    },
    #[error("duplicate instance id {0:?}")]
    DuplicateId(String),
    #[error(
        "unknown corpus format {0:?} (expected one of rams, wikievents, maven, mlee-standoff)"
    )]
    UnknownFormat(String),
    #[error("{}: {message}\n  near: {excerpt}", path.display())]
    Native {
        path: PathBuf,
        message: String,
        excerpt: String,
    },
    #[error("instance {instance_id:?}: {message}")]
    Grammar {
        instance_id: String,
        message: String,
    },
    #[error("template is for task {found} but {expected} was requested")]
    TemplateMismatch { expected: TaskKind, found: TaskKind },
    #[error("expected a {expected} prediction, got {found}")]
    WrongTask { expected: TaskKind, found: TaskKind },
    #[error("no template for task {0}")]
    MissingTemplate(TaskKind),
    #[error("invalid {task} template: {message}")]
    InvalidTemplate { task: TaskKind, message: String },
    #[error("build configuration selects no tasks")]
    NoTasks,
    #[error("no prediction for {} instance(s): {}", ids.len(), ids.join(", "))]
    MissingPredictions { ids: Vec<String> },
    #[error("instance {0:?} has more than one ED prediction")]
    DuplicatePrediction(String),
    #[error("predictions reference {} unknown instance(s): {}", ids.len(), ids.join(", "))]
    UnknownPredictions { ids: Vec<String> },
    #[error("instance {id:?}: gold has {gold} tokens but prediction has {pred}")]
    TokenCountMismatch {
        id: String,
        gold: usize,
        pred: usize,
    },
    #[error(
        "gold and predicted labelings are misaligned at position {index}: {gold:?} vs {pred:?}"
    )]
    Misaligned {
        index: usize,
        gold: String,
        pred: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
