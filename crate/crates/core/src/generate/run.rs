use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use super::project::{render_report, support_files};
use super::{
    organize_project, parse_llm_response, Diagnostic, GenerateError, GeneratedFile, ParseError, ParsedFile,
    ProjectScaffold, StepRecord, StepStatus,
};
use crate::deps::{emit_scripts, CommandTable, Resolution, Shell};
use crate::knowledge::{KnowledgeGraph, LibrarySelection};
use crate::llm::{CompletionRequest, Gateway};
use crate::prompt::{GenerationPlan, GenerationStep, PromptRenderer};
use crate::tree::ComponentTree;

/// Everything a run reads besides the plan and the provider.
pub struct GenerationInputs<'a> {
    pub trees: &'a [ComponentTree],
    pub selection: &'a LibrarySelection,
    pub kb: &'a KnowledgeGraph,
    pub resolution: &'a Resolution,
    pub commands: &'a CommandTable,
    pub shells: &'a BTreeSet<Shell>,
}

pub struct GenerateOptions {
    pub root: PathBuf,
    pub project_name: String,
    pub max_output_tokens: u32,
    pub temperature: f64,
    pub seed: Option<u64>,
    /// Provider calls in flight at once; staging stays in plan order.
    pub concurrency: usize,
    pub renderer: PromptRenderer,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            root: PathBuf::from("generated-app"),
            project_name: "generated-app".into(),
            max_output_tokens: 4096,
            temperature: 0.0,
            seed: None,
            concurrency: 1,
            renderer: PromptRenderer::default(),
        }
    }
}

struct Outcome {
    attempts: u32,
    first_error: Option<ParseError>,
    result: Result<Vec<ParsedFile>, ParseError>,
}

fn corrective(err: &ParseError, step: &GenerationStep) -> String {
    format!(
        "\n\nYour previous reply could not be used: {err}. Answer again with one fenced code block per file. \
         The first line inside each block must be `// file: <path>` (`/* file: <path> */` for CSS). \
         Files for this step: {}.",
        step.expected_paths.join(", ")
    )
}

fn run_step(
    step: &GenerationStep,
    plan: &GenerationPlan,
    gateway: &Gateway,
    inputs: &GenerationInputs,
    opts: &GenerateOptions,
) -> Result<Outcome, GenerateError> {
    let prompt = opts.renderer.render(step, plan, inputs.trees, inputs.selection, inputs.kb)?;
    let req = CompletionRequest {
        system: prompt.system_preamble.clone(),
        user: prompt.user_message(),
        max_output_tokens: opts.max_output_tokens,
        temperature: opts.temperature,
        seed: opts.seed,
    };
    let call = |r: &CompletionRequest| {
        gateway.complete(r).map_err(|source| GenerateError::Provider { step: step.id.clone(), source })
    };
    let first = call(&req)?;
    match parse_llm_response(&first.text) {
        Ok(files) => Ok(Outcome { attempts: 1, first_error: None, result: Ok(files) }),
        Err(e) => {
            log::info!("step {}: {e}; retrying", step.id);
            let mut retry = req.clone();
            retry.user.push_str(&corrective(&e, step));
            let second = call(&retry)?;
            Ok(Outcome { attempts: 2, first_error: Some(e), result: parse_llm_response(&second.text) })
        }
    }
}

/// Executes the plan: render, call, parse, validate paths, stage. A step
/// whose reply cannot be parsed is retried once with a corrective note; if
/// that fails too it is recorded as failed and its dependents are skipped
/// without calling the provider. Nothing is written to disk here.
pub fn generate(
    plan: &GenerationPlan,
    gateway: &Gateway,
    inputs: &GenerationInputs,
    opts: &GenerateOptions,
) -> Result<ProjectScaffold, GenerateError> {
    plan.check()?;
    let mut status: BTreeMap<&str, StepStatus> = BTreeMap::new();
    let mut records: BTreeMap<&str, StepRecord> = BTreeMap::new();
    let mut diagnostics: Vec<Diagnostic> =
        inputs.resolution.warnings.iter().map(|w| Diagnostic::new("version-default", w.clone())).collect();
    let mut staged: Vec<GeneratedFile> = Vec::new();
    let mut owner: BTreeMap<String, String> = BTreeMap::new();
    let mut pending: Vec<&GenerationStep> = plan.steps.iter().collect();
    let limit = opts.concurrency.max(1);

    while !pending.is_empty() {
        let mut wave: Vec<&GenerationStep> = Vec::new();
        let mut rest = Vec::new();
        for step in pending {
            let resolved = step.depends_on.iter().all(|d| status.contains_key(d.as_str()));
            let blocked = step
                .depends_on
                .iter()
                .find(|d| matches!(status.get(d.as_str()), Some(StepStatus::Failed | StepStatus::Skipped)));
            if let (true, Some(dep)) = (resolved, blocked) {
                diagnostics.push(
                    Diagnostic::new("step-skipped", format!("dependency `{dep}` did not complete")).step(&step.id),
                );
                status.insert(&step.id, StepStatus::Skipped);
                records.insert(
                    &step.id,
                    StepRecord {
                        id: step.id.clone(),
                        status: StepStatus::Skipped,
                        attempts: 0,
                        files: vec![],
                        error: None,
                    },
                );
            } else if resolved && wave.len() < limit {
                wave.push(step);
            } else {
                rest.push(step);
            }
        }
        pending = rest;
        if wave.is_empty() {
            continue;
        }

        let outcomes: Vec<Result<Outcome, GenerateError>> = if wave.len() == 1 {
            vec![run_step(wave[0], plan, gateway, inputs, opts)]
        } else {
            std::thread::scope(|s| {
                let handles: Vec<_> =
                    wave.iter().map(|step| s.spawn(move || run_step(step, plan, gateway, inputs, opts))).collect();
                handles.into_iter().map(|h| h.join().expect("generation worker panicked")).collect()
            })
        };

        for (step, outcome) in wave.into_iter().zip(outcomes) {
            let outcome = outcome?;
            if let Some(e) = &outcome.first_error {
                diagnostics
                    .push(Diagnostic::new("retry", format!("reply rejected ({e}); retried once")).step(&step.id));
            }
            let staged_step =
                outcome.result.map_err(|e| format!("reply rejected after retry: {e}")).and_then(|files| {
                    let files = files
                        .into_iter()
                        .map(|f| GeneratedFile {
                            path: f.path,
                            contents: f.contents,
                            role: step.role,
                            step_id: step.id.clone(),
                        })
                        .collect();
                    let (files, notes) = organize_project(files, plan).map_err(|e| e.to_string())?;
                    for f in &files {
                        if let Some(first) = owner.get(&f.path) {
                            return Err(format!("`{}` was already produced by `{first}`", f.path));
                        }
                    }
                    Ok((files, notes))
                });
            let record = match staged_step {
                Ok((files, notes)) => {
                    diagnostics.extend(notes);
                    let paths: Vec<String> = files.iter().map(|f| f.path.clone()).collect();
                    for f in files {
                        owner.insert(f.path.clone(), f.step_id.clone());
                        staged.push(f);
                    }
                    StepRecord {
                        id: step.id.clone(),
                        status: StepStatus::Done,
                        attempts: outcome.attempts,
                        files: paths,
                        error: None,
                    }
                }
                Err(message) => {
                    diagnostics.push(Diagnostic::new("step-failed", message.clone()).step(&step.id));
                    StepRecord {
                        id: step.id.clone(),
                        status: StepStatus::Failed,
                        attempts: outcome.attempts,
                        files: vec![],
                        error: Some(message),
                    }
                }
            };
            status.insert(&step.id, record.status);
            records.insert(&step.id, record);
        }
    }

    staged.sort_by(|a, b| a.path.cmp(&b.path));
    let scripts = emit_scripts(&inputs.resolution.specs, inputs.shells, inputs.commands);
    let mut scaffold = ProjectScaffold {
        root: opts.root.clone(),
        provider_id: gateway.provider_id().to_string(),
        files: staged,
        support: Vec::new(),
        manifest: inputs.resolution.manifest(),
        scripts,
        required_libraries: inputs.selection.names().into_iter().map(String::from).collect(),
        page_views: plan.steps.iter().filter(|s| s.is_page_view()).flat_map(|s| s.expected_paths.clone()).collect(),
        steps: plan.steps.iter().map(|s| records.remove(s.id.as_str()).expect("every step recorded")).collect(),
        diagnostics,
    };
    scaffold.support = support_files(&opts.project_name, plan.steps.is_empty(), inputs.resolution, &scaffold.scripts);
    let report = render_report(&scaffold, inputs.resolution);
    scaffold.support.push(report);
    scaffold.support.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(scaffold)
}
