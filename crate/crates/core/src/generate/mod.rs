//! Runs a generation plan against a completion provider and assembles the
//! project scaffold.

mod parse;
mod project;
mod run;
mod structure;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deps::PackageScript;
use crate::llm::LlmError;
use crate::prompt::{PromptError, Role};

pub use parse::{normalize_path, parse_llm_response, ParseError, ParsedFile};
pub use project::{package_json, render_report, support_files, write_scaffold, REPORT_PATH};
pub use run::{generate, GenerateOptions, GenerationInputs};
pub use structure::{organize_project, role_directories, validate_structure};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratedFile {
    pub path: String,
    pub contents: String,
    pub role: Role,
    pub step_id: String,
}

/// A rule-generated file (manifest, scripts, config, report).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportFile {
    pub path: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Diagnostic { code: code.into(), step_id: None, path: None, message: message.into() }
    }

    pub fn step(mut self, id: &str) -> Self {
        self.step_id = Some(id.into());
        self
    }

    pub fn path(mut self, p: &str) -> Self {
        self.path = Some(p.into());
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.code)?;
        if let Some(s) = &self.step_id {
            write!(f, " {s}")?;
        }
        if let Some(p) = &self.path {
            write!(f, " {p}")?;
        }
        write!(f, ": {}", self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepStatus {
    Done,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub id: String,
    pub status: StepStatus,
    /// Provider calls made for this step.
    pub attempts: u32,
    pub files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectScaffold {
    pub root: PathBuf,
    pub provider_id: String,
    /// LLM-generated files, sorted by path.
    pub files: Vec<GeneratedFile>,
    pub support: Vec<SupportFile>,
    /// Package name to constraint; equals the resolved dependency specs.
    pub manifest: BTreeMap<String, String>,
    pub scripts: Vec<PackageScript>,
    /// Libraries named by the knowledge-base mappings in use.
    pub required_libraries: Vec<String>,
    /// Page view paths the router must reference.
    pub page_views: Vec<String>,
    pub steps: Vec<StepRecord>,
    /// Run log: retries, relocations, failures, skips, warnings.
    pub diagnostics: Vec<Diagnostic>,
}

impl ProjectScaffold {
    pub fn file(&self, path: &str) -> Option<&GeneratedFile> {
        self.files.iter().find(|f| f.path == path)
    }

    /// Every output path with its bytes, sorted by path.
    pub fn all_files(&self) -> Vec<(&str, &str)> {
        let mut out: Vec<(&str, &str)> = self
            .files
            .iter()
            .map(|f| (f.path.as_str(), f.contents.as_str()))
            .chain(self.support.iter().map(|f| (f.path.as_str(), f.contents.as_str())))
            .collect();
        out.sort();
        out
    }

    pub fn retries(&self) -> u32 {
        self.steps.iter().map(|s| s.attempts.saturating_sub(1)).sum()
    }
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("step `{step}`: {source}")]
    Provider {
        step: String,
        #[source]
        source: LlmError,
    },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("`{path}` is produced by both `{first}` and `{second}`")]
    Collision { path: String, first: String, second: String },
    #[error("output directory {0} already exists (use --force to replace it)")]
    OutputExists(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
