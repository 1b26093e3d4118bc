//! `sketch2app` command-line interface.
//!
//! Exit codes: 0 success, 1 pipeline diagnostics or failures, 2 usage or
//! input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sketch2app::deps::Shell;
use sketch2app::pipeline::{rebase_paths, PipelineConfig, PipelineError, ProviderKind};

#[derive(Parser)]
#[command(name = "sketch2app", version, about = "Generate React projects from annotated SVG wireframes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse wireframes and print the inferred component trees.
    Parse(Common),
    /// Build the generation plan and write the rendered prompts.
    Plan(Common),
    /// Run the full pipeline and write the project.
    Generate(Common),
    /// Write the dependency install scripts only.
    Scripts(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Wireframe SVG files, one page each.
    files: Vec<PathBuf>,
    /// JSON pipeline configuration; flags take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Knowledge base JSON (defaults to the built-in seed).
    #[arg(long)]
    kb: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    provider: Option<ProviderArg>,
    /// Token budget per prompt.
    #[arg(long)]
    budget: Option<usize>,
    /// Comma-separated script flavours: posix, windows.
    #[arg(long, value_delimiter = ',')]
    shells: Option<Vec<String>>,
    /// Replace an existing output directory.
    #[arg(long)]
    force: bool,
    /// Do everything except write files.
    #[arg(long)]
    dry_run: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Log filter (error, warn, info, debug, trace).
    #[arg(long)]
    log_level: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProviderArg {
    Stub,
    Http,
}

/// A failure with its exit code.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }

    pub fn pipeline(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let code = if e.is_input_error() { 2 } else { 1 };
        let message = match &e {
            PipelineError::Ingest(i) if i.is_not_found() => format!("file not found: {i}"),
            _ => e.to_string(),
        };
        Failure { code, message }
    }
}

impl Common {
    fn config(&self) -> Result<PipelineConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    let what = if e.kind() == std::io::ErrorKind::NotFound { "file not found" } else { "cannot read" };
                    Failure::usage(format!("{what}: {}: {e}", path.display()))
                })?;
                let mut cfg: PipelineConfig = serde_json::from_str(&text)
                    .map_err(|e| Failure::usage(format!("{}: invalid config: {e}", path.display())))?;
                rebase_paths(&mut cfg, path.parent().unwrap_or_else(|| std::path::Path::new(".")));
                cfg
            }
            None => PipelineConfig::default(),
        };
        if !self.files.is_empty() {
            cfg.wireframe_paths = self.files.clone();
        }
        if let Some(kb) = &self.kb {
            cfg.knowledge_base_path = Some(kb.clone());
        }
        if let Some(out) = &self.out {
            cfg.output_root = out.clone();
        }
        if let Some(p) = self.provider {
            cfg.provider = match p {
                ProviderArg::Stub => ProviderKind::Stub,
                ProviderArg::Http => ProviderKind::Http,
            };
        }
        if let Some(b) = self.budget {
            cfg.token_budget = b;
        }
        if let Some(list) = &self.shells {
            cfg.shells = list.iter().map(|s| s.parse::<Shell>().map_err(Failure::usage)).collect::<Result<_, _>>()?;
            if cfg.shells.is_empty() {
                return Err(Failure::usage("--shells needs at least one of posix, windows"));
            }
        }
        if let Some(level) = &self.log_level {
            cfg.log_level = level.clone();
        }
        if cfg.wireframe_paths.is_empty() {
            return Err(Failure::usage("no wireframe files given"));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let common = match &cli.command {
        Command::Parse(c) | Command::Plan(c) | Command::Generate(c) | Command::Scripts(c) => c,
    };
    let result = common.config().and_then(|cfg| {
        env_logger::Builder::new().parse_filters(&cfg.log_level).format_timestamp(None).init();
        let opts =
            commands::Options { force: common.force, dry_run: common.dry_run, json: common.format == Format::Json };
        match &cli.command {
            Command::Parse(_) => commands::parse(&cfg, &opts),
            Command::Plan(c) => commands::plan(&cfg, &opts, c.out.is_some()),
            Command::Generate(_) => commands::generate(&cfg, &opts),
            Command::Scripts(_) => commands::scripts(&cfg, &opts),
        }
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
