//! Generation planning and token-budgeted prompt rendering.

mod plan;
mod render;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use plan::{camel_case, pascal_case, plan_generation, service_name};
pub use render::{pack_samples, render_prompt, PromptRenderer, PromptTemplates, TEMPLATE_KEYS};

/// Per-step budget when none is configured.
pub const DEFAULT_TOKEN_BUDGET: usize = 6000;

/// Upper bound on samples considered for one step before budgeting.
pub const MAX_SAMPLES_PER_STEP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Scaffold,
    Service,
    Model,
    Viewmodel,
    View,
    Router,
    Styles,
}

impl Role {
    pub const ALL: [Role; 7] =
        [Role::Scaffold, Role::Service, Role::Model, Role::Viewmodel, Role::View, Role::Router, Role::Styles];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Scaffold => "scaffold",
            Role::Service => "service",
            Role::Model => "model",
            Role::Viewmodel => "viewmodel",
            Role::View => "view",
            Role::Router => "router",
            Role::Styles => "styles",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Role::ALL
            .into_iter()
            .find(|r| r.as_str() == s.trim())
            .ok_or_else(|| format!("unknown step role `{}`", s.trim()))
    }
}

/// What a step's subject is: the whole project, a page, or one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Project,
    Page,
    Component,
}

impl Scope {
    pub fn as_str(self) -> &'static str {
        match self {
            Scope::Project => "project",
            Scope::Page => "page",
            Scope::Component => "component",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationStep {
    pub id: String,
    pub role: Role,
    pub scope: Scope,
    /// Artifact name: component, hook owner, service, context or `App`.
    pub name: String,
    pub page: Option<String>,
    /// Component-tree entity ids, or page ids for page and project steps.
    pub subject: Vec<String>,
    pub libraries: Vec<String>,
    pub sample_refs: Vec<String>,
    pub expected_paths: Vec<String>,
    pub depends_on: Vec<String>,
    /// Names this step must wire up, e.g. `("hook", "useSiteMap")`.
    pub links: Vec<(String, String)>,
}

impl GenerationStep {
    pub fn is_page_view(&self) -> bool {
        self.role == Role::View && self.scope == Scope::Page
    }

    pub fn link(&self, key: &str) -> Option<&str> {
        self.links.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn links_of<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.links.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationPlan {
    pub steps: Vec<GenerationStep>,
    pub token_budget_per_step: usize,
}

impl GenerationPlan {
    pub fn step(&self, id: &str) -> Option<&GenerationStep> {
        self.steps.iter().find(|s| s.id == id)
    }

    /// One line per step: id, dependencies and expected files.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("{:>3}. {} -> {}", i + 1, s.id, s.expected_paths.join(", ")));
            if !s.depends_on.is_empty() {
                out.push_str(&format!("  [after {}]", s.depends_on.join(", ")));
            }
            out.push('\n');
        }
        out
    }

    /// Checks budget, path uniqueness and that dependencies point backwards.
    pub fn check(&self) -> Result<(), PromptError> {
        let bad = |m: String| Err(PromptError::InvalidPlan(m));
        if self.token_budget_per_step == 0 {
            return bad("token budget must be positive".into());
        }
        let mut seen_ids = std::collections::HashSet::new();
        let mut seen_paths = std::collections::HashSet::new();
        for s in &self.steps {
            for d in &s.depends_on {
                if !seen_ids.contains(d.as_str()) {
                    return bad(format!("step `{}` depends on `{d}`, which does not precede it", s.id));
                }
            }
            if !seen_ids.insert(s.id.as_str()) {
                return bad(format!("duplicate step id `{}`", s.id));
            }
            for p in &s.expected_paths {
                if !seen_paths.insert(p.as_str()) {
                    return bad(format!("path `{p}` is expected from more than one step"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptText {
    pub system_preamble: String,
    pub instruction: String,
    pub context_block: String,
    /// `(sample id, body)` in inclusion order.
    pub embedded_samples: Vec<(String, String)>,
    pub estimated_tokens: usize,
}

impl PromptText {
    /// The user turn: instruction, context block, then samples.
    pub fn user_message(&self) -> String {
        let mut out = format!("{}\n\n{}", self.instruction, self.context_block);
        for (id, body) in &self.embedded_samples {
            out.push_str(&sample_section(id, body));
        }
        out
    }
}

pub(crate) fn sample_section(id: &str, body: &str) -> String {
    format!("\n\n[sample {id}]\n{}\n[/sample]", body.trim_end())
}

/// Pluggable token counter.
pub trait TokenEstimator: Send + Sync {
    fn estimate(&self, text: &str) -> usize;
}

/// `ceil(chars / 4)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CharQuarterEstimator;

impl TokenEstimator for CharQuarterEstimator {
    fn estimate(&self, text: &str) -> usize {
        estimate_tokens(text)
    }
}

pub fn estimate_tokens(text: &str) -> usize {
    text.chars().count().div_ceil(4)
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("step `{step}`: instruction and context need {needed} tokens, over the budget of {budget}")]
    Budget { step: String, needed: usize, budget: usize },
    #[error("step `{0}` is not part of the plan")]
    UnknownStep(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("prompt template `{key}`: {message}")]
    Template { key: String, message: String },
}
