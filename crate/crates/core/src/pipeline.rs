//! End-to-end wiring: configuration, analysis, planning and generation.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deps::{resolve_with_table, CommandTable, DepsError, Resolution, Shell};
use crate::generate::{generate, GenerateError, GenerateOptions, GenerationInputs, ProjectScaffold};
use crate::knowledge::{
    load_knowledge, retrieve_for_trees, seed_graph, select_libraries, KnowledgeError, KnowledgeGraph, LibrarySelection,
    NodeRetrieval,
};
use crate::llm::{FaultPlan, Gateway, HttpProvider, HttpSettings, LlmError, RateLimit, StubProvider, StubTemplates};
use crate::par::Exec;
use crate::prompt::{
    plan_generation, GenerationPlan, PromptError, PromptRenderer, PromptTemplates, DEFAULT_TOKEN_BUDGET,
};
use crate::tree::{build_trees, validate_tree, ComponentTree, TreeDiagnostic, TreeError};
use crate::wireframe::{read_wireframe, IngestError, WireframeDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    #[default]
    Stub,
    Http,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StubSettings {
    pub templates_dir: Option<PathBuf>,
    pub faults: FaultPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub wireframe_paths: Vec<PathBuf>,
    /// `None` uses the built-in seed knowledge base.
    pub knowledge_base_path: Option<PathBuf>,
    pub output_root: PathBuf,
    pub provider: ProviderKind,
    pub http: HttpSettings,
    pub stub: StubSettings,
    pub prompt_templates_dir: Option<PathBuf>,
    pub token_budget: usize,
    /// Mappings kept per node during retrieval.
    pub top_k: usize,
    pub shells: BTreeSet<Shell>,
    /// Defaults to the output directory name.
    pub project_name: Option<String>,
    pub concurrency: usize,
    pub rate_limit: Option<RateLimit>,
    pub max_input_tokens: Option<usize>,
    pub max_output_tokens: u32,
    pub temperature: f64,
    pub seed: Option<u64>,
    /// Forces the sequential code path for tree building and retrieval.
    pub sequential: bool,
    pub log_level: String,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            wireframe_paths: Vec::new(),
            knowledge_base_path: None,
            output_root: PathBuf::from("generated-app"),
            provider: ProviderKind::Stub,
            http: HttpSettings::default(),
            stub: StubSettings::default(),
            prompt_templates_dir: None,
            token_budget: DEFAULT_TOKEN_BUDGET,
            top_k: 3,
            shells: BTreeSet::from([Shell::Posix, Shell::Windows]),
            project_name: None,
            concurrency: 1,
            rate_limit: None,
            max_input_tokens: None,
            max_output_tokens: 4096,
            temperature: 0.0,
            seed: None,
            sequential: false,
            log_level: "warn".into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
    #[error(transparent)]
    Deps(#[from] DepsError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

impl PipelineError {
    /// Bad invocation or unreadable input, as opposed to a pipeline failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            PipelineError::Config(_)
                | PipelineError::Ingest(_)
                | PipelineError::Knowledge(KnowledgeError::Io { .. } | KnowledgeError::Json(_))
                | PipelineError::Llm(LlmError::Config(_) | LlmError::Credential(_))
                | PipelineError::Generate(GenerateError::OutputExists(_))
        )
    }
}

fn npm_name(raw: &str) -> String {
    let s: String = raw
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '-' })
        .collect();
    let s = s.trim_matches(|c| matches!(c, '-' | '_' | '.')).to_string();
    if s.is_empty() {
        "generated-app".into()
    } else {
        s
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.token_budget == 0 {
            return Err(PipelineError::Config("token_budget must be greater than 0".into()));
        }
        if self.top_k == 0 {
            return Err(PipelineError::Config("top_k must be greater than 0".into()));
        }
        let missing: Vec<String> = self
            .wireframe_paths
            .iter()
            .chain(&self.knowledge_base_path)
            .filter(|p| !p.exists())
            .map(|p| p.display().to_string())
            .collect();
        if !missing.is_empty() {
            return Err(PipelineError::Config(format!("file not found: {}", missing.join(", "))));
        }
        Ok(())
    }

    pub fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }

    pub fn project_name(&self) -> String {
        match &self.project_name {
            Some(n) => npm_name(n),
            None => npm_name(&self.output_root.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()),
        }
    }

    pub fn load_kb(&self) -> Result<KnowledgeGraph, PipelineError> {
        Ok(match &self.knowledge_base_path {
            Some(p) => load_knowledge(p)?,
            None => seed_graph(),
        })
    }

    pub fn renderer(&self) -> Result<PromptRenderer, PipelineError> {
        let templates = match &self.prompt_templates_dir {
            Some(dir) => PromptTemplates::load_dir(dir)?,
            None => PromptTemplates::builtin(),
        };
        Ok(PromptRenderer::new(templates))
    }

    pub fn gateway(&self) -> Result<Gateway, PipelineError> {
        let provider: Arc<dyn crate::llm::CompletionProvider> = match self.provider {
            ProviderKind::Stub => {
                let templates = match &self.stub.templates_dir {
                    Some(dir) => StubTemplates::load_dir(dir)?,
                    None => StubTemplates::builtin(),
                };
                Arc::new(StubProvider::new(templates, self.stub.faults.clone()))
            }
            ProviderKind::Http => Arc::new(HttpProvider::from_env(self.http.clone())?),
        };
        let mut gw = Gateway::new(provider);
        if let Some(limit) = self.rate_limit {
            gw = gw.with_rate_limit(limit);
        }
        if let Some(n) = self.max_input_tokens {
            gw = gw.with_max_input_tokens(n);
        }
        Ok(gw)
    }
}

/// Reads and merges the wireframe files in the given order.
pub fn load_wireframes(paths: &[PathBuf]) -> Result<WireframeDocument, PipelineError> {
    if paths.is_empty() {
        return Err(PipelineError::Config("no wireframe files given".into()));
    }
    let docs = paths.iter().map(|p| read_wireframe(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(WireframeDocument::merge(docs)?)
}

/// Trees with their validation findings.
pub struct Structure {
    pub document: WireframeDocument,
    pub trees: Vec<ComponentTree>,
    /// `(page id, finding)` pairs; empty means every tree is sound.
    pub tree_diagnostics: Vec<(String, TreeDiagnostic)>,
}

pub fn build_structure(document: WireframeDocument, exec: Exec) -> Result<Structure, PipelineError> {
    let trees = build_trees(&document, exec)?;
    let tree_diagnostics =
        trees.iter().flat_map(|t| validate_tree(t).into_iter().map(|d| (t.page_id.clone(), d))).collect();
    Ok(Structure { document, trees, tree_diagnostics })
}

/// Retrieval, library selection and dependency resolution for a structure.
pub struct Analysis {
    pub retrievals: Vec<NodeRetrieval>,
    pub selection: LibrarySelection,
    pub commands: CommandTable,
    pub resolution: Resolution,
}

pub fn analyze(structure: &Structure, kb: &KnowledgeGraph, cfg: &PipelineConfig) -> Result<Analysis, PipelineError> {
    let retrievals = retrieve_for_trees(kb, &structure.trees, cfg.top_k, cfg.exec())?;
    let ranked: Vec<_> = retrievals.iter().map(|r| r.ranked.clone()).collect();
    let selection = select_libraries(&ranked)?;
    let commands = CommandTable::from_graph(kb)?;
    let resolution = resolve_with_table(&selection, &commands)?;
    Ok(Analysis { retrievals, selection, commands, resolution })
}

pub fn build_plan(
    structure: &Structure,
    analysis: &Analysis,
    kb: &KnowledgeGraph,
    cfg: &PipelineConfig,
) -> Result<GenerationPlan, PipelineError> {
    Ok(plan_generation(&structure.trees, &analysis.retrievals, kb, cfg.token_budget)?)
}

/// Everything one full run produces, before anything touches disk.
pub struct Run {
    pub structure: Structure,
    pub analysis: Analysis,
    pub plan: GenerationPlan,
    pub scaffold: ProjectScaffold,
}

/// Ingest through generation. Writing is left to the caller
/// ([`crate::generate::write_scaffold`]).
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Run, PipelineError> {
    cfg.validate()?;
    let kb = cfg.load_kb()?;
    let structure = build_structure(load_wireframes(&cfg.wireframe_paths)?, cfg.exec())?;
    let analysis = analyze(&structure, &kb, cfg)?;
    let plan = build_plan(&structure, &analysis, &kb, cfg)?;
    let gateway = cfg.gateway()?;
    let opts = GenerateOptions {
        root: cfg.output_root.clone(),
        project_name: cfg.project_name(),
        max_output_tokens: cfg.max_output_tokens,
        temperature: cfg.temperature,
        seed: cfg.seed,
        concurrency: cfg.concurrency,
        renderer: cfg.renderer()?,
    };
    let inputs = GenerationInputs {
        trees: &structure.trees,
        selection: &analysis.selection,
        kb: &kb,
        resolution: &analysis.resolution,
        commands: &analysis.commands,
        shells: &cfg.shells,
    };
    let scaffold = generate(&plan, &gateway, &inputs, &opts)?;
    Ok(Run { structure, analysis, plan, scaffold })
}

/// Resolves relative paths in a config read from `base`'s directory.
pub fn rebase_paths(cfg: &mut PipelineConfig, base: &Path) {
    let fix = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    cfg.wireframe_paths.iter_mut().for_each(fix);
    for p in
        [&mut cfg.knowledge_base_path, &mut cfg.prompt_templates_dir, &mut cfg.stub.templates_dir].into_iter().flatten()
    {
        fix(p);
    }
    fix(&mut cfg.output_root);
}
