//! Expansion of a corpus into text-to-text training and evaluation examples.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::tokenize;
use crate::error::{Error, Result};
use crate::ingest::{filter_positive, write_jsonl, Corpus, Granularity, Instance, Split};
use crate::prompt::{render_input, PromptTemplate, PromptVariant};
use crate::reformulate::{make_target, ItemOrder, TaskKind};

/// Model input length limits, in words. Subword tokenisers produce at
/// least this many tokens, so an input over the limit is certainly too long.
pub const SENTENCE_MAX_LEN: usize = 512;
pub const WINDOW_MAX_LEN: usize = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskExample {
    pub instance_id: String,
    pub task: TaskKind,
    pub source: String,
    pub target: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub tasks: BTreeSet<TaskKind>,
    pub variant: PromptVariant,
    /// Drop negative train instances before expansion.
    pub positive_only: bool,
    pub seed: u64,
    pub shuffle: bool,
    /// Also emit the configured EI/EC tasks for dev and test instances.
    pub eval_all_tasks: bool,
    pub order: ItemOrder,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            tasks: TaskKind::ALL.into_iter().collect(),
            variant: PromptVariant::Tags,
            positive_only: false,
            seed: 42,
            shuffle: true,
            eval_all_tasks: false,
            order: ItemOrder::Annotation,
        }
    }
}

impl BuildConfig {
    /// ED alone with task tags.
    pub fn single_task() -> Self {
        BuildConfig {
            tasks: BTreeSet::from([TaskKind::ED]),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    /// Example counts keyed by `split/task`.
    pub counts: BTreeMap<String, usize>,
    pub negatives_dropped: usize,
    pub none_targets: usize,
    /// Example keys (`instance_id/task`) whose input exceeds the length limit.
    pub over_length: Vec<String>,
}

fn tasks_for(split: Split, config: &BuildConfig) -> Vec<TaskKind> {
    match split {
        Split::Train => config.tasks.iter().copied().collect(),
        _ if config.eval_all_tasks => {
            let mut tasks: BTreeSet<TaskKind> = config.tasks.clone();
            tasks.insert(TaskKind::ED);
            tasks.into_iter().collect()
        }
        _ => vec![TaskKind::ED],
    }
}

fn expand(
    inst: &Instance,
    tasks: &[TaskKind],
    config: &BuildConfig,
    templates: &BTreeMap<TaskKind, PromptTemplate>,
    report: &mut BuildReport,
) -> Result<Vec<TaskExample>> {
    let limit = match inst.granularity {
        Granularity::Sentence => SENTENCE_MAX_LEN,
        Granularity::Window => WINDOW_MAX_LEN,
    };
    let mut out = Vec::with_capacity(tasks.len());
    for &task in tasks {
        let template = templates.get(&task).ok_or(Error::MissingTemplate(task))?;
        let source = render_input(&inst.text, task, config.variant, template)?;
        let target = make_target(inst, task, config.order)?;
        if tokenize(&source).len() > limit {
            report.over_length.push(format!("{}/{}", inst.id, task));
        }
        if target.is_none() {
            report.none_targets += 1;
        }
        *report
            .counts
            .entry(format!("{}/{}", inst.split, task))
            .or_insert(0) += 1;
        out.push(TaskExample {
            instance_id: inst.id.clone(),
            task,
            source,
            target: target.text,
            split: inst.split,
        });
    }
    Ok(out)
}

pub fn build(
    corpus: &Corpus,
    config: &BuildConfig,
    templates: &BTreeMap<TaskKind, PromptTemplate>,
) -> Result<Vec<TaskExample>> {
    build_with_report(corpus, config, templates).map(|(examples, _)| examples)
}

/// Train examples (one per instance and configured task, optionally
/// shuffled) followed by dev and test examples in corpus order.
pub fn build_with_report(
    corpus: &Corpus,
    config: &BuildConfig,
    templates: &BTreeMap<TaskKind, PromptTemplate>,
) -> Result<(Vec<TaskExample>, BuildReport)> {
    if config.tasks.is_empty() {
        return Err(Error::NoTasks);
    }
    let mut report = BuildReport::default();
    let train_source;
    let train: Box<dyn Iterator<Item = &Instance>> = if config.positive_only {
        let all_train = corpus.split(Split::Train).count();
        let train_only = Corpus::new(corpus.name(), corpus.split(Split::Train).cloned().collect())?;
        train_source = filter_positive(&train_only);
        report.negatives_dropped = all_train - train_source.len();
        Box::new(train_source.instances().iter())
    } else {
        Box::new(corpus.split(Split::Train))
    };

    let train_tasks = tasks_for(Split::Train, config);
    let mut train_examples = Vec::new();
    for inst in train {
        train_examples.extend(expand(inst, &train_tasks, config, templates, &mut report)?);
    }
    if config.shuffle {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        train_examples.shuffle(&mut rng);
    }

    let mut examples = train_examples;
    for split in [Split::Dev, Split::Test] {
        let tasks = tasks_for(split, config);
        for inst in corpus.split(split) {
            examples.extend(expand(inst, &tasks, config, templates, &mut report)?);
        }
    }
    Ok((examples, report))
}

/// Writes examples as JSON Lines with fields
/// `instance_id, task, source, target, split`.
pub fn write_examples(examples: &[TaskExample], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_jsonl(&mut out, examples).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_examples(path: impl AsRef<Path>) -> Result<Vec<TaskExample>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| Error::Record {
            path: path.to_path_buf(),
            line: idx + 1,
            source,
        })?);
    }
    Ok(out)
}
