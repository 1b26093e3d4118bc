//! Dependency resolution and install-script emission.
//!
//! Install commands are not hard-coded: each tool's command templates come
//! from best-practice nodes in the knowledge base, and each package's tool
//! and default constraint from its software-stack node.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knowledge::{
    merge_constraints, KnowledgeError, KnowledgeGraph, LibrarySelection, NodeKind, VersionConstraint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tool {
    NodePackageManager,
    NodeVersionManager,
    System,
}

impl Tool {
    pub fn as_str(self) -> &'static str {
        match self {
            Tool::NodePackageManager => "node-package-manager",
            Tool::NodeVersionManager => "node-version-manager",
            Tool::System => "system",
        }
    }

    /// Runtime prerequisites are installed before any package.
    pub fn is_runtime(self) -> bool {
        !matches!(self, Tool::NodePackageManager)
    }
}

impl FromStr for Tool {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "node-package-manager" => Ok(Tool::NodePackageManager),
            "node-version-manager" => Ok(Tool::NodeVersionManager),
            "system" => Ok(Tool::System),
            other => Err(format!("unknown tool `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencySpec {
    pub package: String,
    pub version_constraint: VersionConstraint,
    pub tool: Tool,
    pub order_index: usize,
}

/// Resolved specs plus fail-soft warnings (e.g. defaulted versions).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Resolution {
    pub specs: Vec<DependencySpec>,
    pub warnings: Vec<String>,
}

impl Resolution {
    /// Package name to constraint, as written into the project manifest.
    pub fn manifest(&self) -> BTreeMap<String, String> {
        self.specs.iter().map(|s| (s.package.clone(), s.version_constraint.to_string())).collect()
    }
}

#[derive(Debug, Error)]
pub enum DepsError {
    #[error("libraries unknown to the knowledge base command table: {}", .0.join(", "))]
    UnknownLibraries(Vec<String>),
    #[error("no command template for tool `{}` (needed by {})", .tool.as_str(), .packages.join(", "))]
    MissingTemplate { tool: Tool, packages: Vec<String> },
    #[error("knowledge base entry `{node}`: {message}")]
    BadEntry { node: String, message: String },
    #[error(transparent)]
    Knowledge(#[from] KnowledgeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackageInfo {
    pub tool: Tool,
    pub default_constraint: Option<VersionConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolCommands {
    pub posix_install: String,
    pub windows_install: String,
    pub posix_update: Option<String>,
    pub windows_update: Option<String>,
}

/// Everything the resolver and script emitter read from the knowledge base.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CommandTable {
    pub packages: BTreeMap<String, PackageInfo>,
    pub tools: BTreeMap<Tool, ToolCommands>,
    /// Framework baseline every generated project installs.
    pub baseline: BTreeSet<String>,
}

impl CommandTable {
    pub fn from_graph(kb: &KnowledgeGraph) -> Result<Self, DepsError> {
        let bad = |node: &str, message: String| DepsError::BadEntry { node: node.to_string(), message };
        let mut table = CommandTable::default();

        for n in kb.nodes_of(NodeKind::SoftwareStack) {
            let Some(package) = n.payload.get("package") else { continue };
            let tool = match n.payload.get("tool") {
                Some(t) => t.parse().map_err(|e| bad(&n.id, e))?,
                None => Tool::NodePackageManager,
            };
            let default_constraint = match n.payload.get("version") {
                Some(v) => {
                    Some(v.parse().map_err(|e: crate::knowledge::ConstraintParseError| bad(&n.id, e.to_string()))?)
                }
                None => None,
            };
            table.packages.insert(package.clone(), PackageInfo { tool, default_constraint });
        }

        for n in kb.nodes_of(NodeKind::BestPractice) {
            if let Some(list) = n.payload.get("baseline") {
                table.baseline.extend(list.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from));
            }
            let Some(tool) = n.payload.get("tool") else { continue };
            let tool: Tool = tool.parse().map_err(|e| bad(&n.id, e))?;
            let get = |key: &str| n.payload.get(key).cloned();
            let (Some(posix_install), Some(windows_install)) = (get("posix_install"), get("windows_install")) else {
                return Err(bad(&n.id, "command templates need posix_install and windows_install".into()));
            };
            table.tools.insert(
                tool,
                ToolCommands {
                    posix_install,
                    windows_install,
                    posix_update: get("posix_update"),
                    windows_update: get("windows_update"),
                },
            );
        }
        Ok(table)
    }
}

/// Turns a library selection into ordered install specs.
///
/// Baseline framework packages are always added. Order is runtime
/// prerequisites, then framework baseline, then selected libraries, each
/// tier alphabetical.
pub fn resolve_dependencies(selection: &LibrarySelection, kb: &KnowledgeGraph) -> Result<Resolution, DepsError> {
    let table = CommandTable::from_graph(kb)?;
    resolve_with_table(selection, &table)
}

pub fn resolve_with_table(selection: &LibrarySelection, table: &CommandTable) -> Result<Resolution, DepsError> {
    let mut unknown: BTreeSet<String> = BTreeSet::new();
    // name -> (tier, requested constraint)
    let mut wanted: BTreeMap<String, (u8, Option<VersionConstraint>)> = BTreeMap::new();

    for name in &table.baseline {
        match table.packages.get(name) {
            Some(info) => {
                let tier = if info.tool.is_runtime() { 0 } else { 1 };
                wanted.insert(name.clone(), (tier, None));
            }
            None => {
                unknown.insert(name.clone());
            }
        }
    }
    for entry in &selection.entries {
        let Some(info) = table.packages.get(&entry.name) else {
            unknown.insert(entry.name.clone());
            continue;
        };
        let tier = if info.tool.is_runtime() { 0 } else { 2 };
        let slot = wanted.entry(entry.name.clone()).or_insert((tier, None));
        slot.1 = merge_constraints(&entry.name, slot.1.as_ref(), entry.constraint.as_ref())?;
    }
    if !unknown.is_empty() {
        return Err(DepsError::UnknownLibraries(unknown.into_iter().collect()));
    }

    let mut warnings = Vec::new();
    let mut rows: Vec<(u8, String, Tool, VersionConstraint)> = Vec::with_capacity(wanted.len());
    for (name, (tier, requested)) in wanted {
        let info = &table.packages[&name];
        let constraint = match (requested, &info.default_constraint) {
            (Some(c), _) => c,
            (None, Some(d)) => d.clone(),
            (None, None) => {
                warnings.push(format!("no version constraint known for `{name}`; installing latest"));
                VersionConstraint::Latest
            }
        };
        rows.push((tier, name, info.tool, constraint));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mut missing: BTreeMap<Tool, Vec<String>> = BTreeMap::new();
    for (_, name, tool, _) in &rows {
        if !table.tools.contains_key(tool) {
            missing.entry(*tool).or_default().push(name.clone());
        }
    }
    if let Some((tool, packages)) = missing.into_iter().next() {
        return Err(DepsError::MissingTemplate { tool, packages });
    }

    let specs = rows
        .into_iter()
        .enumerate()
        .map(|(i, (_, package, tool, version_constraint))| DependencySpec {
            package,
            version_constraint,
            tool,
            order_index: i,
        })
        .collect();
    Ok(Resolution { specs, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shell {
    Posix,
    Windows,
}

impl Shell {
    pub fn as_str(self) -> &'static str {
        match self {
            Shell::Posix => "posix",
            Shell::Windows => "windows",
        }
    }

    /// Project-relative location of the script.
    pub fn script_path(self) -> &'static str {
        match self {
            Shell::Posix => "scripts/install.sh",
            Shell::Windows => "scripts/install.bat",
        }
    }

    fn newline(self) -> &'static str {
        match self {
            Shell::Posix => "\n",
            Shell::Windows => "\r\n",
        }
    }

    fn comment(self) -> &'static str {
        match self {
            Shell::Posix => "#",
            Shell::Windows => "rem",
        }
    }

    fn opening(self) -> &'static [&'static str] {
        match self {
            Shell::Posix => &["#!/bin/sh"],
            Shell::Windows => &["@echo off"],
        }
    }

    fn prelude(self) -> &'static [&'static str] {
        match self {
            Shell::Posix => &[
                "set -e",
                "cd \"$(dirname \"$0\")/..\"",
                "[ -s \"${NVM_DIR:-$HOME/.nvm}/nvm.sh\" ] && . \"${NVM_DIR:-$HOME/.nvm}/nvm.sh\"",
            ],
            Shell::Windows => &["setlocal", "cd /d \"%~dp0..\""],
        }
    }
}

impl FromStr for Shell {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "posix" | "sh" => Ok(Shell::Posix),
            "windows" | "bat" | "cmd" => Ok(Shell::Windows),
            other => Err(format!("unknown shell `{other}` (expected posix or windows)")),
        }
    }
}

impl fmt::Display for Shell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub const SCRIPT_HEADER: &str = "Installs the direct dependencies of the generated project.\n\
Safe to re-run: the package tools skip versions that are already installed.\n\
Each line carries the matching update command as a comment.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageScript {
    pub shell: Shell,
    pub header_comment: String,
    /// One install command per spec, in spec order.
    pub lines: Vec<String>,
}

impl PackageScript {
    /// Lines a rendered script has besides the per-spec commands.
    pub fn fixed_line_count(&self) -> usize {
        self.shell.opening().len() + self.header_comment.lines().count() + self.shell.prelude().len()
    }

    pub fn render(&self) -> String {
        let sh = self.shell;
        let mut out: Vec<String> = sh.opening().iter().map(|s| s.to_string()).collect();
        out.extend(self.header_comment.lines().map(|l| format!("{} {l}", sh.comment()).trim_end().to_string()));
        out.extend(sh.prelude().iter().map(|s| s.to_string()));
        out.extend(self.lines.iter().cloned());
        let nl = sh.newline();
        let mut text = out.join(nl);
        text.push_str(nl);
        text
    }
}

fn fill(template: &str, spec: &DependencySpec) -> String {
    template
        .replace("{package}", &spec.package)
        .replace("{constraint}", &spec.version_constraint.to_string())
        .replace("{range}", &spec.version_constraint.explicit_range())
}

/// Renders one script per requested shell. Pure: identical inputs give
/// byte-identical scripts.
pub fn emit_scripts(specs: &[DependencySpec], shells: &BTreeSet<Shell>, table: &CommandTable) -> Vec<PackageScript> {
    let mut ordered: Vec<&DependencySpec> = specs.iter().collect();
    ordered.sort_by_key(|s| s.order_index);
    shells
        .iter()
        .map(|&shell| {
            let lines = ordered
                .iter()
                .map(|spec| {
                    let cmds = table.tools.get(&spec.tool).expect("resolver guarantees a template per tool");
                    let (install, update) = match shell {
                        Shell::Posix => (&cmds.posix_install, &cmds.posix_update),
                        Shell::Windows => (&cmds.windows_install, &cmds.windows_update),
                    };
                    let mut line = fill(install, spec);
                    if let Some(u) = update {
                        let sep = if shell == Shell::Windows { " & rem" } else { "  #" };
                        line.push_str(&format!("{sep} update: {}", fill(u, spec)));
                    }
                    line
                })
                .collect();
            PackageScript { shell, header_comment: SCRIPT_HEADER.to_string(), lines }
        })
        .collect()
}

/// Package named by a rendered install line, if the line is one.
pub fn installed_package(line: &str) -> Option<String> {
    let cmd = line.split(" & rem ").next()?.split("  #").next()?.trim();
    let cmd = cmd.strip_prefix("call ").unwrap_or(cmd);
    let rest = cmd.strip_prefix("npm install ").or_else(|| cmd.strip_prefix("nvm install ").map(|_| "node@"))?;
    let arg = rest.split_whitespace().next()?.trim_matches('"');
    let at = arg.rfind('@').filter(|&i| i > 0)?;
    Some(arg[..at].to_string())
}
