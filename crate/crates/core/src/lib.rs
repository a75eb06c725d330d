//! Event detection as text generation.
//!
//! Corpora are read into a canonical form ([`ingest`]), rendered as three
//! delimited target strings for trigger identification (EI), event
//! classification (EC) and full detection (ED) ([`reformulate`]), wrapped in
//! task tags or instructional prompts ([`prompt`]) and expanded into
//! training files ([`builder`]). Model generations are parsed back
//! ([`parse`]), projected onto tokens ([`align`]) and scored ([`eval`]).

pub mod align;
pub mod builder;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod parse;
pub mod prompt;
pub mod reformulate;

pub use error::{Error, InvalidInstance, Result};
pub use ingest::{Corpus, EventMention, Granularity, Instance, Split};
pub use parse::{ParsedPrediction, PredictionRecord};
pub use reformulate::{ItemOrder, TargetString, TaskKind};
