use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sketch2app::deps::emit_scripts;
use sketch2app::generate::{validate_structure, write_scaffold, StepStatus};
use sketch2app::pipeline::{
    analyze, build_plan, build_structure, load_wireframes, run_pipeline, PipelineConfig, PipelineError,
};
use sketch2app::prompt::PromptRenderer;
use sketch2app::tree::render_outline;

use crate::Failure;

pub struct Options {
    pub force: bool,
    pub dry_run: bool,
    pub json: bool,
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::pipeline(format!("{}: {e}", path.display()))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json<T: Serialize>(value: &T) {
    emit(&(serde_json::to_string_pretty(value).expect("report serializes") + "\n"));
}

/// Writes `files` under `dir`, refusing to touch an existing directory
/// unless forced.
fn write_dir(dir: &Path, files: &[(String, String)], force: bool) -> Result<(), Failure> {
    if dir.exists() {
        if !force {
            return Err(Failure::usage(format!(
                "output directory {} already exists (use --force to replace it)",
                dir.display()
            )));
        }
        fs::remove_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    for (rel, contents) in files {
        let path = dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| io_failure(&path, e))?;
    }
    Ok(())
}

pub fn parse(cfg: &PipelineConfig, opts: &Options) -> Result<u8, Failure> {
    let structure = build_structure(load_wireframes(&cfg.wireframe_paths)?, cfg.exec())?;
    if opts.json {
        let findings: Vec<_> = structure
            .tree_diagnostics
            .iter()
            .map(|(page, d)| json!({"page": page, "rule": d.rule, "entity_id": d.entity_id, "message": d.message}))
            .collect();
        print_json(&json!({
            "document": structure.document,
            "trees": structure.trees,
            "tree_diagnostics": findings,
        }));
    } else {
        let mut out = String::new();
        for tree in &structure.trees {
            let _ = write!(out, "{}", render_outline(tree));
        }
        emit(&out);
        for d in &structure.document.diagnostics {
            eprintln!("note: {d}");
        }
        for (page, d) in &structure.tree_diagnostics {
            eprintln!("tree {page}: [{}] {}: {}", d.rule, d.entity_id, d.message);
        }
    }
    Ok(if structure.tree_diagnostics.is_empty() { 0 } else { 1 })
}

fn prompt_file_name(index: usize, step_id: &str) -> String {
    let slug: String = step_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    format!("prompts/{:02}-{slug}.txt", index + 1)
}

pub fn plan(cfg: &PipelineConfig, opts: &Options, out_given: bool) -> Result<u8, Failure> {
    let kb = cfg.load_kb()?;
    let structure = build_structure(load_wireframes(&cfg.wireframe_paths)?, cfg.exec())?;
    let analysis = analyze(&structure, &kb, cfg)?;
    let plan = build_plan(&structure, &analysis, &kb, cfg)?;
    let renderer: PromptRenderer = cfg.renderer()?;

    let mut files = vec![
        ("plan.txt".to_string(), plan.summary()),
        ("plan.json".to_string(), serde_json::to_string_pretty(&plan).expect("plan serializes") + "\n"),
        (
            "selection.json".to_string(),
            serde_json::to_string_pretty(&analysis.selection).expect("selection serializes") + "\n",
        ),
    ];
    for (i, step) in plan.steps.iter().enumerate() {
        let p =
            renderer.render(step, &plan, &structure.trees, &analysis.selection, &kb).map_err(PipelineError::from)?;
        let text = format!(
            "[system]\n{}\n\n[user]\n{}\n\n[estimated tokens: {}]\n",
            p.system_preamble,
            p.user_message(),
            p.estimated_tokens
        );
        files.push((prompt_file_name(i, &step.id), text));
    }

    let dir: PathBuf = if out_given {
        cfg.output_root.clone()
    } else {
        let mut name = cfg.output_root.file_name().unwrap_or_default().to_os_string();
        name.push("-plan");
        cfg.output_root.with_file_name(name)
    };
    if !opts.dry_run {
        write_dir(&dir, &files, opts.force)?;
    }

    if opts.json {
        print_json(&json!({
            "plan": plan,
            "selection": analysis.selection,
            "dependencies": analysis.resolution.specs,
            "output": if opts.dry_run { None } else { Some(dir.display().to_string()) },
        }));
    } else {
        let mut out = plan.summary();
        let _ = writeln!(out, "libraries:");
        for lib in &analysis.selection.entries {
            let constraint = lib.constraint.as_ref().map_or_else(|| "*".to_string(), |c| c.to_string());
            let _ = writeln!(out, "  {}@{constraint} ({}; from {})", lib.name, lib.purpose, lib.source_mapping);
        }
        if opts.dry_run {
            let _ = writeln!(out, "dry run: {} files not written", files.len());
        } else {
            let _ = writeln!(out, "wrote {} files to {}", files.len(), dir.display());
        }
        emit(&out);
    }
    for w in &analysis.resolution.warnings {
        eprintln!("warning: {w}");
    }
    Ok(0)
}

pub fn generate(cfg: &PipelineConfig, opts: &Options) -> Result<u8, Failure> {
    let run = run_pipeline(cfg)?;
    let scaffold = &run.scaffold;
    if !opts.dry_run {
        write_scaffold(scaffold, &cfg.output_root, opts.force).map_err(PipelineError::from)?;
    }
    let issues = validate_structure(scaffold);
    let count = |st: StepStatus| scaffold.steps.iter().filter(|s| s.status == st).count();
    if opts.json {
        print_json(&json!({
            "output": cfg.output_root.display().to_string(),
            "written": !opts.dry_run,
            "provider": scaffold.provider_id,
            "files": scaffold.all_files().iter().map(|(p, _)| p).collect::<Vec<_>>(),
            "steps": scaffold.steps,
            "diagnostics": scaffold.diagnostics,
            "structure": issues,
        }));
    } else {
        let mut s = String::new();
        let verb = if opts.dry_run { "would write" } else { "wrote" };
        let _ = writeln!(s, "{verb} {} files to {}", scaffold.all_files().len(), cfg.output_root.display());
        let _ = writeln!(
            s,
            "steps: {} done, {} failed, {} skipped; {} retries",
            count(StepStatus::Done),
            count(StepStatus::Failed),
            count(StepStatus::Skipped),
            scaffold.retries()
        );
        for d in &scaffold.diagnostics {
            let _ = writeln!(s, "  {d}");
        }
        if issues.is_empty() {
            let _ = writeln!(s, "structure: ok");
        } else {
            let _ = writeln!(s, "structure: {} problem(s)", issues.len());
            for d in &issues {
                let _ = writeln!(s, "  {d}");
            }
        }
        emit(&s);
    }
    Ok(if issues.is_empty() { 0 } else { 1 })
}

pub fn scripts(cfg: &PipelineConfig, opts: &Options) -> Result<u8, Failure> {
    let kb = cfg.load_kb()?;
    let structure = build_structure(load_wireframes(&cfg.wireframe_paths)?, cfg.exec())?;
    let analysis = analyze(&structure, &kb, cfg)?;
    let scripts = emit_scripts(&analysis.resolution.specs, &cfg.shells, &analysis.commands);
    let files: Vec<(String, String)> =
        scripts.iter().map(|s| (s.shell.script_path().to_string(), s.render())).collect();

    if !opts.dry_run {
        for (rel, contents) in &files {
            let path = cfg.output_root.join(rel);
            if path.exists() && !opts.force {
                return Err(Failure::usage(format!("{} already exists (use --force to replace it)", path.display())));
            }
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
            }
            fs::write(&path, contents).map_err(|e| io_failure(&path, e))?;
            #[cfg(unix)]
            if rel.ends_with(".sh") {
                use std::os::unix::fs::PermissionsExt;
                fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).map_err(|e| io_failure(&path, e))?;
            }
        }
    }

    if opts.json {
        print_json(&json!({
            "dependencies": analysis.resolution.specs,
            "scripts": files.iter().map(|(p, c)| json!({"path": p, "contents": c})).collect::<Vec<_>>(),
        }));
    } else {
        let mut out = String::new();
        for (rel, contents) in &files {
            if opts.dry_run {
                let _ = write!(out, "== {rel}\n{contents}");
            } else {
                let _ = writeln!(out, "wrote {}", cfg.output_root.join(rel).display());
            }
        }
        emit(&out);
    }
    for w in &analysis.resolution.warnings {
        eprintln!("warning: {w}");
    }
    Ok(0)
}
