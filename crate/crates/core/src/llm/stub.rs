//! Deterministic provider: fills a per-role template from the `[context]`
//! block of the prompt.
//!
//! Template lines may start with a directive:
//! `@each KEY: text` repeats `text` for every `KEY` value (`{{item}}`, and
//! `{{item.name}}`/`{{item.value}}` for `name=value` items), `@if KEY: text`
//! keeps it only when `KEY` is present and `@unless KEY: text` only when it
//! is absent. `{{KEY}}` expands to the first value of `KEY`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Mutex;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{CompletionProvider, CompletionRequest, CompletionResult, LlmError, Usage};
use crate::prompt::{estimate_tokens, Role, TEMPLATE_KEYS};

const BUILTIN: [(&str, &str); 8] = [
    ("scaffold", include_str!("../../assets/templates/stub/scaffold.txt")),
    ("service", include_str!("../../assets/templates/stub/service.txt")),
    ("model", include_str!("../../assets/templates/stub/model.txt")),
    ("viewmodel", include_str!("../../assets/templates/stub/viewmodel.txt")),
    ("view", include_str!("../../assets/templates/stub/view.txt")),
    ("view-page", include_str!("../../assets/templates/stub/view-page.txt")),
    ("router", include_str!("../../assets/templates/stub/router.txt")),
    ("styles", include_str!("../../assets/templates/stub/styles.txt")),
];

/// Reply used for injected faults: prose with no code block.
pub const MALFORMED_RESPONSE: &str = "Sorry, I could not produce the requested file this time.\n";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StubTemplates {
    by_key: BTreeMap<String, String>,
}

impl StubTemplates {
    pub fn builtin() -> Self {
        StubTemplates { by_key: BUILTIN.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect() }
    }

    /// Reads `<key>.txt` for every role template key; any missing file is a
    /// configuration error.
    pub fn load_dir(dir: &Path) -> Result<Self, LlmError> {
        let mut by_key = BTreeMap::new();
        for key in TEMPLATE_KEYS {
            let path = dir.join(format!("{key}.txt"));
            let text = std::fs::read_to_string(&path)
                .map_err(|e| LlmError::Config(format!("stub template for `{key}`: {}: {e}", path.display())))?;
            by_key.insert(key.to_string(), text);
        }
        Ok(StubTemplates { by_key })
    }

    pub fn from_map(by_key: BTreeMap<String, String>) -> Result<Self, LlmError> {
        for r in Role::ALL {
            if !by_key.contains_key(r.as_str()) {
                return Err(LlmError::Config(format!("no stub template for role `{r}`")));
            }
        }
        Ok(StubTemplates { by_key })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaultCount {
    Times(u32),
    Always,
}

/// Injected malformed replies: the first `malformed_first` calls overall,
/// plus per-subject counts keyed by the context `subject` value.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultPlan {
    #[serde(default)]
    pub malformed_first: u32,
    #[serde(default)]
    pub per_subject: BTreeMap<String, FaultCount>,
}

#[derive(Debug, Default)]
struct FaultState {
    calls: u32,
    per_subject: HashMap<String, u32>,
}

pub struct StubProvider {
    templates: StubTemplates,
    faults: FaultPlan,
    state: Mutex<FaultState>,
}

impl StubProvider {
    pub fn new(templates: StubTemplates, faults: FaultPlan) -> Self {
        StubProvider { templates, faults, state: Mutex::new(FaultState::default()) }
    }

    pub fn builtin() -> Self {
        Self::new(StubTemplates::builtin(), FaultPlan::default())
    }

    fn inject_fault(&self, subject: &str) -> bool {
        let mut st = self.state.lock().unwrap_or_else(|e| e.into_inner());
        st.calls += 1;
        let global = st.calls <= self.faults.malformed_first;
        let seen = st.per_subject.entry(subject.to_string()).or_insert(0);
        *seen += 1;
        let local = match self.faults.per_subject.get(subject) {
            Some(FaultCount::Always) => true,
            Some(FaultCount::Times(n)) => *seen <= *n,
            None => false,
        };
        global || local
    }

    /// The reply for a prompt, ignoring fault injection.
    pub fn respond(&self, user: &str) -> Result<String, LlmError> {
        let ctx = parse_context(user);
        let first = |k: &str| ctx.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let role_text =
            first("role").ok_or_else(|| LlmError::Config("prompt has no `role` in its context block".into()))?;
        let role: Role = role_text.parse().map_err(LlmError::Config)?;
        let scoped = first("scope").map(|s| format!("{role}-{s}"));
        let template = scoped
            .as_deref()
            .and_then(|k| self.templates.by_key.get(k))
            .or_else(|| self.templates.by_key.get(role.as_str()))
            .ok_or_else(|| LlmError::Config(format!("no stub template for role `{role}`")))?;

        let mut values: BTreeMap<&str, Vec<String>> = BTreeMap::new();
        for (k, v) in &ctx {
            values.entry(k.as_str()).or_default().push(v.clone());
        }
        let subject = first("subject").unwrap_or("Component").to_string();
        values.entry("subject").or_insert_with(|| vec![subject.clone()]);
        values.entry("hook").or_insert_with(|| vec![format!("use{subject}")]);

        let body = expand(template, &values);
        let lang = body
            .lines()
            .next()
            .and_then(|l| l.rsplit('.').next())
            .map(|ext| ext.trim_end_matches(" */").trim())
            .unwrap_or("");
        Ok(format!("Generated {role} for {subject}.\n\n```{lang}\n{}\n```\n", body.trim_end()))
    }
}

impl CompletionProvider for StubProvider {
    fn id(&self) -> &str {
        "stub"
    }

    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, LlmError> {
        let subject =
            parse_context(&req.user).into_iter().find(|(k, _)| k == "subject").map(|(_, v)| v).unwrap_or_default();
        let text = if self.inject_fault(&subject) { MALFORMED_RESPONSE.to_string() } else { self.respond(&req.user)? };
        let usage = Usage {
            input_tokens: (estimate_tokens(&req.system) + estimate_tokens(&req.user)) as u64,
            output_tokens: estimate_tokens(&text) as u64,
        };
        Ok(CompletionResult { text, provider_id: "stub".into(), usage: Some(usage) })
    }
}

/// Unindented `key: value` lines between `[context]` and `[/context]`.
pub fn parse_context(user: &str) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut inside = false;
    for line in user.lines() {
        let line = line.trim_end_matches('\r');
        match line {
            "[context]" => inside = true,
            "[/context]" => break,
            _ if inside && !line.starts_with(char::is_whitespace) => {
                if let Some((k, v)) = line.split_once(": ") {
                    out.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
            _ => {}
        }
    }
    out
}

fn directive_re() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^@(each|if|unless) ([A-Za-z0-9_-]+): ?(.*)$").expect("valid regex"))
}

fn placeholder_re() -> &'static Regex {
    static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{([A-Za-z0-9_.-]+)\}\}").expect("valid regex"))
}

fn substitute(line: &str, values: &BTreeMap<&str, Vec<String>>, item: Option<&str>) -> String {
    placeholder_re()
        .replace_all(line, |c: &regex::Captures| {
            let key = &c[1];
            match (key, item) {
                ("item", Some(it)) => it.to_string(),
                ("item.name", Some(it)) => it.split_once('=').map_or(it, |(n, _)| n).to_string(),
                ("item.value", Some(it)) => it.split_once('=').map_or("", |(_, v)| v).to_string(),
                _ => values.get(key).and_then(|v| v.first()).cloned().unwrap_or_default(),
            }
        })
        .into_owned()
}

fn expand(template: &str, values: &BTreeMap<&str, Vec<String>>) -> String {
    let mut out = Vec::new();
    for line in template.lines() {
        let Some(c) = directive_re().captures(line) else {
            out.push(substitute(line, values, None));
            continue;
        };
        let key = &c[2];
        let rest = &c[3];
        let items = values.get(key).map(Vec::as_slice).unwrap_or(&[]);
        match &c[1] {
            "each" => out.extend(items.iter().map(|it| substitute(rest, values, Some(it)))),
            "if" if !items.is_empty() => out.push(substitute(rest, values, None)),
            "unless" if items.is_empty() => out.push(substitute(rest, values, None)),
            _ => {}
        }
    }
    out.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(ctx: &str) -> CompletionRequest {
        CompletionRequest::new("system", format!("Do it.\n\n[context]\n{ctx}\n[/context]\n"))
    }

    #[test]
    fn view_subject_names_the_component_file() {
        let stub = StubProvider::builtin();
        let out = stub.complete(&req("role: view\nsubject: MapView")).unwrap();
        assert!(out.text.contains("```tsx\n// file: src/components/MapView.tsx\n"));
        assert!(out.text.contains("import { useMapView } from '../hooks/useMapView';"));
    }

    #[test]
    fn viewmodel_subject_names_the_hook_file() {
        let out = StubProvider::builtin().complete(&req("role: viewmodel\nsubject: MapView")).unwrap();
        assert!(out.text.contains("// file: src/hooks/useMapView.ts"));
    }

    #[test]
    fn same_prompt_same_reply() {
        let stub = StubProvider::builtin();
        let r = req("role: router\nsubject: App\nroute: HomePage=/\nroute: MapPage=/map");
        assert_eq!(stub.complete(&r).unwrap(), stub.complete(&r).unwrap());
        let text = stub.complete(&r).unwrap().text;
        assert!(text.contains("<Route path=\"/map\" element={<MapPage />} />"));
    }

    #[test]
    fn unknown_or_missing_role_is_a_config_error() {
        let stub = StubProvider::builtin();
        assert!(matches!(stub.complete(&req("role: controller\nsubject: X")), Err(LlmError::Config(_))));
        assert!(matches!(stub.complete(&req("subject: X")), Err(LlmError::Config(_))));
    }

    #[test]
    fn missing_role_template_rejected_at_construction() {
        let mut m: BTreeMap<String, String> = BUILTIN.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        m.remove("styles");
        assert!(matches!(StubTemplates::from_map(m), Err(LlmError::Config(_))));
    }

    #[test]
    fn fault_counter_spoils_first_call_only() {
        let stub = StubProvider::new(StubTemplates::builtin(), FaultPlan { malformed_first: 1, ..Default::default() });
        let r = req("role: view\nsubject: MapView");
        assert_eq!(stub.complete(&r).unwrap().text, MALFORMED_RESPONSE);
        assert!(stub.complete(&r).unwrap().text.contains("```"));
    }

    #[test]
    fn per_subject_faults() {
        let plan = FaultPlan {
            malformed_first: 0,
            per_subject: BTreeMap::from([
                ("A".to_string(), FaultCount::Always),
                ("B".to_string(), FaultCount::Times(1)),
            ]),
        };
        let stub = StubProvider::new(StubTemplates::builtin(), plan);
        for _ in 0..3 {
            assert_eq!(stub.complete(&req("role: view\nsubject: A")).unwrap().text, MALFORMED_RESPONSE);
        }
        assert_eq!(stub.complete(&req("role: view\nsubject: B")).unwrap().text, MALFORMED_RESPONSE);
        assert_ne!(stub.complete(&req("role: view\nsubject: B")).unwrap().text, MALFORMED_RESPONSE);
    }

    #[test]
    fn directives_expand() {
        let values = BTreeMap::from([("a", vec!["x=1".to_string(), "y=2".to_string()]), ("b", vec!["B".to_string()])]);
        let t = "head {{b}}\n@each a: - {{item.name}} is {{item.value}} ({{item}})\n@if b: has b\n@unless c: no c\n@if c: has c";
        assert_eq!(expand(t, &values), "head B\n- x is 1 (x=1)\n- y is 2 (y=2)\nhas b\nno c");
    }

    #[test]
    fn context_parsing_ignores_indented_details() {
        let ctx = parse_context("x\n[context]\nrole: view\nnode: a kind=b\n  data: d\n[/context]\nrole: other");
        assert_eq!(ctx, vec![("role".into(), "view".into()), ("node".into(), "a kind=b".into())]);
    }
}
