use std::collections::BTreeMap;

use super::{Diagnostic, GenerateError, GeneratedFile, ProjectScaffold, StepStatus};
use crate::prompt::{GenerationPlan, Role};

/// Directories a role may write to; the first is where strays are moved.
/// An empty prefix list means "directly inside `src/`".
pub fn role_directories(role: Role) -> &'static [&'static str] {
    match role {
        Role::View => &["src/components/"],
        Role::Viewmodel => &["src/hooks/"],
        Role::Service => &["src/services/"],
        Role::Model => &["src/contexts/", "src/services/"],
        Role::Styles => &["src/styles/"],
        Role::Router | Role::Scaffold => &[],
    }
}

fn directly_in_src(path: &str) -> bool {
    path.strip_prefix("src/").is_some_and(|rest| !rest.is_empty() && !rest.contains('/'))
}

fn conforms(role: Role, path: &str) -> bool {
    let dirs = role_directories(role);
    if dirs.is_empty() {
        directly_in_src(path)
    } else {
        dirs.iter().any(|d| path.starts_with(d) && path.len() > d.len())
    }
}

fn basename(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}

/// Moves files that sit outside their role's directory. A file whose name
/// matches one of the step's expected paths goes there; otherwise it goes
/// to the role's primary directory. Contents are never touched.
pub fn organize_project(
    files: Vec<GeneratedFile>,
    plan: &GenerationPlan,
) -> Result<(Vec<GeneratedFile>, Vec<Diagnostic>), GenerateError> {
    let mut out = Vec::with_capacity(files.len());
    let mut notes = Vec::new();
    let mut owner: BTreeMap<String, String> = BTreeMap::new();
    for mut f in files {
        if !conforms(f.role, &f.path) {
            let name = basename(&f.path).to_string();
            let expected =
                plan.step(&f.step_id).and_then(|s| s.expected_paths.iter().find(|p| basename(p) == name)).cloned();
            let target = expected.unwrap_or_else(|| match role_directories(f.role).first() {
                Some(dir) => format!("{dir}{name}"),
                None => format!("src/{name}"),
            });
            notes.push(
                Diagnostic::new("relocated", format!("{} file moved to {target}", f.role))
                    .step(&f.step_id)
                    .path(&f.path),
            );
            f.path = target;
        }
        if let Some(first) = owner.insert(f.path.clone(), f.step_id.clone()) {
            return Err(GenerateError::Collision { path: f.path, first, second: f.step_id });
        }
        out.push(f);
    }
    Ok((out, notes))
}

const CONVENTION_DIRS: [&str; 5] = ["src/components/", "src/hooks/", "src/services/", "src/contexts/", "src/styles/"];

/// Structural checks; an empty list means the scaffold passes.
pub fn validate_structure(scaffold: &ProjectScaffold) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let paths: Vec<&str> = scaffold.files.iter().map(|f| f.path.as_str()).collect();

    for f in &scaffold.files {
        let Some(rest) = f.path.strip_prefix("src/components/") else { continue };
        if rest.starts_with("pages/") || !(rest.ends_with(".tsx") || rest.ends_with(".jsx")) {
            continue;
        }
        let stem = rest.rsplit('/').next().unwrap_or(rest).rsplit_once('.').map_or(rest, |(s, _)| s);
        let has_vm =
            ["ts", "tsx", "js", "jsx"].iter().any(|ext| paths.contains(&format!("src/hooks/use{stem}.{ext}").as_str()));
        if !has_vm {
            out.push(
                Diagnostic::new("orphan-view", format!("no viewmodel src/hooks/use{stem}.ts for view {stem}"))
                    .step(&f.step_id)
                    .path(&f.path),
            );
        }
    }

    for f in &scaffold.files {
        let ok = CONVENTION_DIRS.iter().any(|d| f.path.starts_with(d)) || directly_in_src(&f.path);
        if !ok {
            out.push(
                Diagnostic::new("out-of-convention", "file is outside the convention directories")
                    .step(&f.step_id)
                    .path(&f.path),
            );
        }
    }

    let router = scaffold.file("src/App.tsx");
    for page in &scaffold.page_views {
        let reference = page.strip_prefix("src/").unwrap_or(page);
        let reference = reference.rsplit_once('.').map_or(reference, |(s, _)| s);
        if !router.is_some_and(|r| r.contents.contains(reference)) {
            out.push(
                Diagnostic::new("router-missing-page", format!("router does not reference {reference}")).path(page),
            );
        }
    }

    for lib in &scaffold.required_libraries {
        if !scaffold.manifest.contains_key(lib) {
            out.push(Diagnostic::new(
                "manifest-missing-library",
                format!("`{lib}` is required but not in package.json"),
            ));
        }
    }

    for s in &scaffold.steps {
        if s.status == StepStatus::Failed {
            out.push(
                Diagnostic::new("step-failed", s.error.clone().unwrap_or_else(|| "step failed".into())).step(&s.id),
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::{GenerationStep, Scope};

    fn file(path: &str, role: Role, step: &str) -> GeneratedFile {
        GeneratedFile { path: path.into(), contents: String::new(), role, step_id: step.into() }
    }

    fn plan() -> GenerationPlan {
        let step = GenerationStep {
            id: "page:home".into(),
            role: Role::View,
            scope: Scope::Page,
            name: "HomePage".into(),
            page: Some("home".into()),
            subject: vec!["home".into()],
            libraries: vec![],
            sample_refs: vec![],
            expected_paths: vec!["src/components/pages/HomePage.tsx".into()],
            depends_on: vec![],
            links: vec![],
        };
        GenerationPlan { steps: vec![step], token_budget_per_step: 100 }
    }

    #[test]
    fn relocation_rules() {
        let (files, notes) = organize_project(
            vec![
                file("MapView.tsx", Role::View, "view:x"),
                file("src/hooks/useMapView.ts", Role::Viewmodel, "vm:x"),
                file("src/App.tsx", Role::Router, "router"),
                file("pages/HomePage.tsx", Role::View, "page:home"),
                file("src/hooks/main.tsx", Role::Scaffold, "scaffold"),
            ],
            &plan(),
        )
        .unwrap();
        let paths: Vec<_> = files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(
            paths,
            [
                "src/components/MapView.tsx",
                "src/hooks/useMapView.ts",
                "src/App.tsx",
                "src/components/pages/HomePage.tsx",
                "src/main.tsx"
            ]
        );
        assert_eq!(notes.len(), 3);
        assert!(notes.iter().all(|n| n.code == "relocated"));
    }

    #[test]
    fn collision_after_normalization() {
        let err = organize_project(
            vec![file("MapView.tsx", Role::View, "a"), file("src/components/MapView.tsx", Role::View, "b")],
            &plan(),
        )
        .unwrap_err();
        assert!(matches!(err, GenerateError::Collision { .. }));
    }

    fn scaffold(files: Vec<GeneratedFile>) -> ProjectScaffold {
        ProjectScaffold {
            root: "out".into(),
            provider_id: "t".into(),
            files,
            support: vec![],
            manifest: BTreeMap::from([("leaflet".to_string(), "^1.9.4".to_string())]),
            scripts: vec![],
            required_libraries: vec!["leaflet".into()],
            page_views: vec!["src/components/pages/HomePage.tsx".into()],
            steps: vec![],
            diagnostics: vec![],
        }
    }

    fn good() -> Vec<GeneratedFile> {
        let mut app = file("src/App.tsx", Role::Router, "router");
        app.contents = "lazy(() => import('./components/pages/HomePage'))".into();
        vec![
            app,
            file("src/components/MapView.tsx", Role::View, "v"),
            file("src/hooks/useMapView.ts", Role::Viewmodel, "vm"),
            file("src/components/pages/HomePage.tsx", Role::View, "page:home"),
        ]
    }

    #[test]
    fn clean_scaffold_has_no_diagnostics() {
        assert_eq!(validate_structure(&scaffold(good())), vec![]);
    }

    #[test]
    fn missing_viewmodel_is_one_orphan_view() {
        let mut files = good();
        files.retain(|f| f.path != "src/hooks/useMapView.ts");
        let d = validate_structure(&scaffold(files));
        assert_eq!(d.iter().map(|d| d.code.as_str()).collect::<Vec<_>>(), ["orphan-view"]);
    }

    #[test]
    fn stray_root_file_is_one_out_of_convention() {
        let mut files = good();
        files.push(file("notes.md", Role::Scaffold, "scaffold"));
        let d = validate_structure(&scaffold(files));
        assert_eq!(d.iter().map(|d| d.code.as_str()).collect::<Vec<_>>(), ["out-of-convention"]);
    }

    #[test]
    fn router_and_manifest_checks() {
        let mut files = good();
        files[0].contents.clear();
        let mut s = scaffold(files);
        s.manifest.clear();
        let codes: Vec<_> = validate_structure(&s).into_iter().map(|d| d.code).collect();
        assert_eq!(codes, ["router-missing-page", "manifest-missing-library"]);
    }
}
