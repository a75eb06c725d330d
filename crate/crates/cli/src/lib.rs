//! The `edkit` command line: convert, stats, build and evaluate.
//!
//! Every command writes its main output to `--out` and a run manifest to
//! `<out>.manifest.json`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use edkit::align::OccurrencePolicy;
use edkit::builder::{build_with_report, write_examples, BuildConfig};
use edkit::eval::{compute_stats, evaluate, render_table, EvalOptions, Scheme, Subset};
use edkit::ingest::{adapt_with_report, load_canonical, write_canonical, NativeFormat};
use edkit::parse::read_predictions;
use edkit::prompt::{default_templates, load_templates, PromptVariant};
use edkit::{ItemOrder, TaskKind};
use log::{info, warn};
use serde::Serialize;

pub mod manifest;

use manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] edkit::Error),
    #[error("{} contains no instances", .0.display())]
    EmptyCorpus(PathBuf),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("serialisation failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl CliError {
    /// 1 for problems with the user's data or flags, 2 for internal failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Serialize(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "edkit",
    version,
    about = "Event detection as text generation: corpus conversion, statistics, task building and scoring"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a native corpus (RAMS, WikiEvents, MAVEN, MLEE standoff) to canonical JSON Lines.
    Convert(ConvertArgs),
    /// Print and save dataset statistics for a canonical corpus.
    Stats(StatsArgs),
    /// Expand a canonical corpus into EI/EC/ED text-to-text examples.
    Build(BuildArgs),
    /// Score a predictions file against a canonical corpus.
    Evaluate(EvaluateArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Convert(_) => "convert",
            Command::Stats(_) => "stats",
            Command::Build(_) => "build",
            Command::Evaluate(_) => "evaluate",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvertArgs {
    /// Native file, or a directory of split-named files.
    #[arg(long)]
    pub input: PathBuf,
    /// rams, wikievents, maven or mlee-standoff.
    #[arg(long)]
    #[serde(serialize_with = "as_display")]
    pub format: NativeFormat,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StatsArgs {
    /// Canonical JSON Lines corpus.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderArg {
    Annotation,
    Offset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OccurrenceArg {
    All,
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubsetArg {
    All,
    Pos,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BuildArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Comma-separated tasks for the train split.
    #[arg(long, value_delimiter = ',', default_value = "EI,EC,ED")]
    pub tasks: Vec<TaskKind>,
    #[arg(long, default_value = "tags")]
    pub variant: PromptVariant,
    /// Template JSON Lines file; the shipped templates when omitted.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// Drop train instances without events.
    #[arg(long)]
    pub positive_only: bool,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Order of triggers within a target.
    #[arg(long, value_enum, default_value = "annotation")]
    pub order: OrderArg,
    /// Keep train examples in corpus order.
    #[arg(long)]
    pub no_shuffle: bool,
    /// Emit every configured task for dev and test instances, not only ED.
    #[arg(long)]
    pub eval_all_tasks: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// JSON Lines of {"instance_id", "task", "generation"}.
    #[arg(long)]
    pub predictions: PathBuf,
    /// Comma-separated schemes.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "token_micro,token_macro,token_weighted,multilabel_appB,mwt_exact_match,mct_accuracy"
    )]
    pub schemes: Vec<Scheme>,
    #[arg(long, value_enum, default_value = "both")]
    pub subset: SubsetArg,
    /// Which occurrences of a repeated predicted trigger get labelled.
    #[arg(long, value_enum, default_value = "all")]
    pub occurrence: OccurrenceArg,
    #[arg(long)]
    pub out: PathBuf,
}

fn as_display<T: std::fmt::Display, S: serde::Serializer>(
    value: &T,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(value)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Convert(args) => cmd_convert(args),
        Command::Stats(args) => cmd_stats(args).map(|_| ()),
        Command::Build(args) => cmd_build(args),
        Command::Evaluate(args) => cmd_evaluate(args).map(|_| ()),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn cmd_convert(args: &ConvertArgs) -> Result<()> {
    let (corpus, report) = adapt_with_report(&args.input, args.format)?;
    write_canonical(&corpus, &args.out)?;
    info!(
        "converted {} documents into {} instances ({} duplicate mentions dropped, {} skipped)",
        report.documents,
        corpus.len(),
        report.duplicates_dropped,
        report.skipped.len()
    );
    RunManifest::new("convert", args, &[&args.input])?
        .with_summary(&report)?
        .write_next_to(&args.out)
}

pub fn cmd_stats(args: &StatsArgs) -> Result<edkit::eval::DatasetStats> {
    let corpus = load_canonical(&args.input)?;
    if corpus.is_empty() {
        return Err(CliError::EmptyCorpus(args.input.clone()));
    }
    let stats = compute_stats(&corpus);
    for w in &stats.warnings {
        warn!("{w}");
    }
    println!("{}", serde_json::to_string_pretty(&stats)?);
    write_json(&stats, &args.out)?;
    RunManifest::new("stats", args, &[&args.input])?.write_next_to(&args.out)?;
    Ok(stats)
}

pub fn cmd_build(args: &BuildArgs) -> Result<()> {
    let corpus = load_canonical(&args.input)?;
    let templates = match &args.templates {
        Some(path) => load_templates(path)?,
        None => default_templates(corpus.name()),
    };
    let config = BuildConfig {
        tasks: args.tasks.iter().copied().collect::<BTreeSet<_>>(),
        variant: args.variant,
        positive_only: args.positive_only,
        seed: args.seed,
        shuffle: !args.no_shuffle,
        eval_all_tasks: args.eval_all_tasks,
        order: match args.order {
            OrderArg::Annotation => ItemOrder::Annotation,
            OrderArg::Offset => ItemOrder::Offset,
        },
    };
    let (examples, report) = build_with_report(&corpus, &config, &templates)?;
    write_examples(&examples, &args.out)?;
    if !report.over_length.is_empty() {
        warn!(
            "{} inputs exceed the model length limit, first: {}",
            report.over_length.len(),
            report.over_length[0]
        );
    }
    info!(
        "wrote {} examples to {}",
        examples.len(),
        args.out.display()
    );
    let mut inputs: Vec<&Path> = vec![&args.input];
    if let Some(t) = &args.templates {
        inputs.push(t);
    }
    RunManifest::new("build", args, &inputs)?
        .with_summary(&report)?
        .write_next_to(&args.out)
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<edkit::eval::EvaluationReport> {
    let corpus = load_canonical(&args.input)?;
    let records = read_predictions(&args.predictions)?;
    let options = EvalOptions {
        schemes: args.schemes.clone(),
        subsets: match args.subset {
            SubsetArg::All => vec![Subset::All],
            SubsetArg::Pos => vec![Subset::Pos],
            SubsetArg::Both => vec![Subset::All, Subset::Pos],
        },
        occurrence: match args.occurrence {
            OccurrenceArg::All => OccurrencePolicy::All,
            OccurrenceArg::First => OccurrencePolicy::First,
        },
    };
    let report = evaluate(&corpus, &records, &options)?;
    write_json(&report, &args.out)?;
    print!("{}", render_table(&report));
    RunManifest::new("evaluate", args, &[&args.input, &args.predictions])?
        .with_summary(&report.diagnostics)?
        .write_next_to(&args.out)?;
    Ok(report)
}
