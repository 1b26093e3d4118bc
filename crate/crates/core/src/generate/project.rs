use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{validate_structure, GenerateError, ProjectScaffold, StepStatus, SupportFile};
use crate::deps::{PackageScript, Resolution, Tool};

#[derive(Serialize)]
struct PackageJson<'a> {
    name: &'a str,
    private: bool,
    version: &'a str,
    #[serde(rename = "type")]
    kind: &'a str,
    scripts: BTreeMap<&'a str, &'a str>,
    dependencies: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    engines: BTreeMap<String, String>,
}

/// `package.json` text. npm-installed specs become dependencies; runtime
/// specs (node and system tools) go under `engines`.
pub fn package_json(name: &str, resolution: &Resolution) -> String {
    let mut dependencies = BTreeMap::new();
    let mut engines = BTreeMap::new();
    for spec in &resolution.specs {
        let target = if spec.tool == Tool::NodePackageManager { &mut dependencies } else { &mut engines };
        target.insert(spec.package.clone(), spec.version_constraint.to_string());
    }
    let pkg = PackageJson {
        name,
        private: true,
        version: "0.1.0",
        kind: "module",
        scripts: BTreeMap::from([("build", "tsc && vite build"), ("dev", "vite"), ("preview", "vite preview")]),
        dependencies,
        engines,
    };
    let mut text = serde_json::to_string_pretty(&pkg).expect("package.json serializes");
    text.push('\n');
    text
}

const TSCONFIG: &str = r#"{
  "compilerOptions": {
    "target": "ES2020",
    "lib": ["ES2020", "DOM", "DOM.Iterable"],
    "module": "ESNext",
    "moduleResolution": "bundler",
    "jsx": "react-jsx",
    "strict": true,
    "skipLibCheck": true,
    "noEmit": true,
    "types": ["vite/client"]
  },
  "include": ["src"]
}
"#;

const VITE_CONFIG: &str = "import { defineConfig } from 'vite';
import react from '@vitejs/plugin-react';

export default defineConfig({
  plugins: [react()],
});
";

fn index_html(name: &str) -> String {
    format!(
        "<!doctype html>
<html lang=\"en\">
  <head>
    <meta charset=\"UTF-8\" />
    <meta name=\"viewport\" content=\"width=device-width, initial-scale=1.0\" />
    <title>{name}</title>
  </head>
  <body>
    <div id=\"root\"></div>
    <script type=\"module\" src=\"/src/main.tsx\"></script>
  </body>
</html>
"
    )
}

/// Rule-generated files other than the report. Build config is omitted when
/// the plan is empty, since there is no entry module to build.
pub fn support_files(
    name: &str,
    empty_plan: bool,
    resolution: &Resolution,
    scripts: &[PackageScript],
) -> Vec<SupportFile> {
    let mut out = vec![SupportFile { path: "package.json".into(), contents: package_json(name, resolution) }];
    if !empty_plan {
        out.push(SupportFile { path: "index.html".into(), contents: index_html(name) });
        out.push(SupportFile { path: "tsconfig.json".into(), contents: TSCONFIG.into() });
        out.push(SupportFile { path: "vite.config.ts".into(), contents: VITE_CONFIG.into() });
    }
    for s in scripts {
        out.push(SupportFile { path: s.shell.script_path().into(), contents: s.render() });
    }
    out
}

pub const REPORT_PATH: &str = "GENERATION_REPORT.txt";

/// Plain-text run summary. Contains no timestamps so reruns compare equal.
pub fn render_report(scaffold: &ProjectScaffold, resolution: &Resolution) -> SupportFile {
    let count = |st: StepStatus| scaffold.steps.iter().filter(|s| s.status == st).count();
    let mut r = String::new();
    let _ = writeln!(r, "Generation report");
    let _ = writeln!(r, "provider: {}", scaffold.provider_id);
    let _ = writeln!(
        r,
        "steps: {} (done {}, failed {}, skipped {})",
        scaffold.steps.len(),
        count(StepStatus::Done),
        count(StepStatus::Failed),
        count(StepStatus::Skipped)
    );
    let _ = writeln!(r, "retries: {}", scaffold.retries());

    r.push_str("\n[steps]\n");
    for s in &scaffold.steps {
        let status = match s.status {
            StepStatus::Done => "done",
            StepStatus::Failed => "failed",
            StepStatus::Skipped => "skipped",
        };
        let line = format!("{status:<8} {} attempts={} {}", s.id, s.attempts, s.files.join(" "));
        let _ = writeln!(r, "{}", line.trim_end());
    }

    r.push_str("\n[dependencies]\n");
    let mut specs: Vec<_> = resolution.specs.iter().collect();
    specs.sort_by_key(|s| s.order_index);
    for s in specs {
        let _ = writeln!(r, "{:>3}. {} {} ({})", s.order_index + 1, s.package, s.version_constraint, s.tool.as_str());
    }

    r.push_str("\n[diagnostics]\n");
    if scaffold.diagnostics.is_empty() {
        r.push_str("none\n");
    }
    for d in &scaffold.diagnostics {
        let _ = writeln!(r, "{d}");
    }

    r.push_str("\n[structure]\n");
    let issues = validate_structure(scaffold);
    if issues.is_empty() {
        r.push_str("ok\n");
    }
    for d in issues {
        let _ = writeln!(r, "{d}");
    }
    SupportFile { path: REPORT_PATH.into(), contents: r }
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> GenerateError + '_ {
    move |source| GenerateError::Io { path: path.to_path_buf(), source }
}

fn sibling(root: &Path, tag: &str) -> PathBuf {
    let name = root.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    root.with_file_name(format!(".{name}.{tag}-{}", std::process::id()))
}

/// Writes the scaffold into a staging directory next to `root` and renames
/// it into place, so `root` either holds the complete output or is left
/// as it was. An existing `root` is replaced only with `force`.
pub fn write_scaffold(scaffold: &ProjectScaffold, root: &Path, force: bool) -> Result<(), GenerateError> {
    if root.exists() && !force {
        return Err(GenerateError::OutputExists(root.to_path_buf()));
    }
    if let Some(parent) = root.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io(parent))?;
    }
    let staging = sibling(root, "staging");
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(io(&staging))?;
    }
    let written = (|| {
        for (rel, contents) in scaffold.all_files() {
            let path = staging.join(rel);
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir).map_err(io(dir))?;
            }
            fs::write(&path, contents).map_err(io(&path))?;
            #[cfg(unix)]
            if rel.ends_with(".sh") {
                use std::os::unix::fs::PermissionsExt;
                fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).map_err(io(&path))?;
            }
        }
        Ok(())
    })();
    if let Err(e) = written {
        let _ = fs::remove_dir_all(&staging);
        return Err(e);
    }
    if root.exists() {
        let old = sibling(root, "old");
        fs::rename(root, &old).map_err(io(root))?;
        if let Err(e) = fs::rename(&staging, root) {
            let _ = fs::rename(&old, root);
            let _ = fs::remove_dir_all(&staging);
            return Err(io(root)(e));
        }
        fs::remove_dir_all(&old).map_err(io(&old))?;
    } else {
        fs::rename(&staging, root).map_err(io(root))?;
    }
    Ok(())
}
