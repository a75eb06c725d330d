//! Model inputs: a bare task tag, or an instruction with worked examples.
//!
//! Instruction layout:
//!
//! ```text
//! Definition: <definition>
//! Input: <example input>
//! Output: <example output>
//! ...
//! Input: <instance text>
//! Output:
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parse::parse_generation;
use crate::reformulate::TaskKind;

const DEFAULT_TEMPLATES: &str = include_str!("../templates/default.jsonl");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptVariant {
    #[default]
    Tags,
    Instr,
}

impl PromptVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            PromptVariant::Tags => "tags",
            PromptVariant::Instr => "instr",
        }
    }
}

impl fmt::Display for PromptVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PromptVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "tags" => Ok(PromptVariant::Tags),
            "instr" => Ok(PromptVariant::Instr),
            other => Err(format!(
                "unknown prompt variant {other:?} (expected tags or instr)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptExample {
    pub input: String,
    pub output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub task: TaskKind,
    pub tag: String,
    pub definition: String,
    #[serde(default)]
    pub examples: Vec<PromptExample>,
}

impl PromptTemplate {
    /// Every example output must parse cleanly under the task's grammar.
    pub fn validate(&self) -> Result<()> {
        let invalid = |message: String| Error::InvalidTemplate {
            task: self.task,
            message,
        };
        if self.tag.trim().is_empty() {
            return Err(invalid("tag is empty".into()));
        }
        if self.definition.trim().is_empty() {
            return Err(invalid("definition is empty".into()));
        }
        for (i, ex) in self.examples.iter().enumerate() {
            if ex.input.trim().is_empty() {
                return Err(invalid(format!("example {i} has an empty input")));
            }
            let parsed = parse_generation(&ex.output, self.task, "template");
            if let Some(issue) = parsed.diagnostics.first() {
                return Err(invalid(format!(
                    "example {i} output {:?}: {} at {:?}",
                    ex.output,
                    issue.kind.as_str(),
                    issue.fragment
                )));
            }
        }
        Ok(())
    }
}

pub fn render_input(
    instance_text: &str,
    task: TaskKind,
    variant: PromptVariant,
    template: &PromptTemplate,
) -> Result<String> {
    if template.task != task {
        return Err(Error::TemplateMismatch {
            expected: task,
            found: template.task,
        });
    }
    Ok(match variant {
        PromptVariant::Tags => format!("{}: {}", template.tag, instance_text),
        PromptVariant::Instr => {
            let mut out = format!("Definition: {}\n", template.definition);
            for ex in &template.examples {
                out.push_str(&format!("Input: {}\nOutput: {}\n", ex.input, ex.output));
            }
            out.push_str(&format!("Input: {instance_text}\nOutput:"));
            out
        }
    })
}

fn parse_templates(source: &str, origin: &Path) -> Result<BTreeMap<TaskKind, PromptTemplate>> {
    let mut out = BTreeMap::new();
    for (idx, line) in source.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let template: PromptTemplate =
            serde_json::from_str(line).map_err(|source| Error::Record {
                path: origin.to_path_buf(),
                line: idx + 1,
                source,
            })?;
        template.validate()?;
        out.insert(template.task, template);
    }
    Ok(out)
}

/// Reads a template file: one JSON object per task, one per line.
pub fn load_templates(path: impl AsRef<Path>) -> Result<BTreeMap<TaskKind, PromptTemplate>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut source = String::new();
    for line in BufReader::new(file).lines() {
        source.push_str(&line.map_err(|e| Error::io(path, e))?);
        source.push('\n');
    }
    parse_templates(&source, path)
}

/// The shipped templates: one definition and two examples per task, one
/// general-domain and one biomedical. Biomedical corpora see their own
/// domain's example first.
pub fn default_templates(corpus_name: &str) -> BTreeMap<TaskKind, PromptTemplate> {
    let mut templates = parse_templates(DEFAULT_TEMPLATES, Path::new("templates/default.jsonl"))
        .expect("shipped templates are valid");
    if corpus_name.to_ascii_lowercase().contains("mlee") {
        for t in templates.values_mut() {
            t.examples.reverse();
        }
    }
    templates
}
