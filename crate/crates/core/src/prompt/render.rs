use std::collections::BTreeMap;
use std::path::Path;

use super::{
    sample_section, CharQuarterEstimator, GenerationPlan, GenerationStep, PromptError, PromptText, Scope,
    TokenEstimator,
};
use crate::knowledge::{KnowledgeGraph, LibrarySelection, NodeKind};
use crate::tree::{ComponentNode, ComponentTree, NodeRole};

/// Instruction template names; `view-page` serves page-level views.
pub const TEMPLATE_KEYS: [&str; 8] =
    ["scaffold", "service", "model", "viewmodel", "view", "view-page", "router", "styles"];

const BUILTIN: [(&str, &str); 9] = [
    ("preamble", include_str!("../../assets/templates/prompt/preamble.txt")),
    ("scaffold", include_str!("../../assets/templates/prompt/scaffold.txt")),
    ("service", include_str!("../../assets/templates/prompt/service.txt")),
    ("model", include_str!("../../assets/templates/prompt/model.txt")),
    ("viewmodel", include_str!("../../assets/templates/prompt/viewmodel.txt")),
    ("view", include_str!("../../assets/templates/prompt/view.txt")),
    ("view-page", include_str!("../../assets/templates/prompt/view-page.txt")),
    ("router", include_str!("../../assets/templates/prompt/router.txt")),
    ("styles", include_str!("../../assets/templates/prompt/styles.txt")),
];

/// Preamble and per-role instruction texts with `{{placeholder}}` slots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplates {
    pub preamble: String,
    pub instructions: BTreeMap<String, String>,
}

impl PromptTemplates {
    /// Templates compiled into the binary.
    pub fn builtin() -> Self {
        let mut instructions: BTreeMap<String, String> =
            BUILTIN.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let preamble = instructions.remove("preamble").expect("builtin preamble");
        PromptTemplates { preamble, instructions }
    }

    /// Reads `preamble.txt` and one `<key>.txt` per [`TEMPLATE_KEYS`] entry.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        let read = |key: &str| {
            let path = dir.join(format!("{key}.txt"));
            std::fs::read_to_string(&path).map_err(|e| PromptError::Template {
                key: key.to_string(),
                message: format!("{}: {e}", path.display()),
            })
        };
        let preamble = read("preamble")?;
        let mut instructions = BTreeMap::new();
        for key in TEMPLATE_KEYS {
            instructions.insert(key.to_string(), read(key)?);
        }
        Ok(PromptTemplates { preamble, instructions })
    }

    fn instruction_for(&self, step: &GenerationStep) -> Result<&str, PromptError> {
        let key = if step.is_page_view() { "view-page" } else { step.role.as_str() };
        self.instructions
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| PromptError::Template { key: key.to_string(), message: "missing".into() })
    }
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self::builtin()
    }
}

pub struct PromptRenderer {
    pub templates: PromptTemplates,
    pub estimator: Box<dyn TokenEstimator>,
}

impl Default for PromptRenderer {
    fn default() -> Self {
        PromptRenderer { templates: PromptTemplates::builtin(), estimator: Box::new(CharQuarterEstimator) }
    }
}

/// How many leading sections fit: each is appended to `base` while the
/// estimate stays within `budget`; the first that does not fit stops the
/// scan. `None` when `base` alone is over budget.
pub fn pack_samples(estimator: &dyn TokenEstimator, base: &str, sections: &[String], budget: usize) -> Option<usize> {
    let mut text = base.to_string();
    if estimator.estimate(&text) > budget {
        return None;
    }
    let mut n = 0;
    for s in sections {
        text.push_str(s);
        if estimator.estimate(&text) > budget {
            break;
        }
        n += 1;
    }
    Some(n)
}

/// Renders with the builtin templates and the `ceil(chars / 4)` estimator.
pub fn render_prompt(
    step: &GenerationStep,
    plan: &GenerationPlan,
    trees: &[ComponentTree],
    selection: &LibrarySelection,
    kb: &KnowledgeGraph,
) -> Result<PromptText, PromptError> {
    PromptRenderer::default().render(step, plan, trees, selection, kb)
}

impl PromptRenderer {
    pub fn new(templates: PromptTemplates) -> Self {
        PromptRenderer { templates, estimator: Box::new(CharQuarterEstimator) }
    }

    pub fn render(
        &self,
        step: &GenerationStep,
        plan: &GenerationPlan,
        trees: &[ComponentTree],
        selection: &LibrarySelection,
        kb: &KnowledgeGraph,
    ) -> Result<PromptText, PromptError> {
        if plan.step(&step.id) != Some(step) {
            return Err(PromptError::UnknownStep(step.id.clone()));
        }
        let role_label = if step.is_page_view() { "page view".to_string() } else { step.role.to_string() };
        let fill = |t: &str| {
            t.replace("{{role}}", &role_label)
                .replace("{{name}}", &step.name)
                .replace("{{files}}", &step.expected_paths.join(", "))
                .replace("{{page}}", step.page.as_deref().unwrap_or(""))
                .replace("{{route}}", step.link("route").unwrap_or(""))
                .replace("{{practices}}", &practices(kb))
        };
        let system_preamble = fill(&self.templates.preamble).trim_end().to_string();
        let instruction = fill(self.templates.instruction_for(step)?).trim_end().to_string();
        let context_block = context_block(step, trees, selection);

        let candidates: Vec<(String, String)> = step
            .sample_refs
            .iter()
            .filter_map(|id| kb.samples().iter().find(|s| &s.id == id))
            .map(|s| (s.id.clone(), s.body.clone()))
            .collect();
        let sections: Vec<String> = candidates.iter().map(|(id, body)| sample_section(id, body)).collect();

        let base = format!("{system_preamble}{instruction}\n\n{context_block}");
        let budget = plan.token_budget_per_step;
        let fit = pack_samples(self.estimator.as_ref(), &base, &sections, budget).ok_or_else(|| {
            PromptError::Budget { step: step.id.clone(), needed: self.estimator.estimate(&base), budget }
        })?;

        let mut prompt = PromptText {
            system_preamble,
            instruction,
            context_block,
            embedded_samples: candidates.into_iter().take(fit).collect(),
            estimated_tokens: 0,
        };
        prompt.estimated_tokens = self.estimator.estimate(&(prompt.system_preamble.clone() + &prompt.user_message()));
        Ok(prompt)
    }
}

fn practices(kb: &KnowledgeGraph) -> String {
    let mut items: Vec<_> = kb
        .nodes_of(NodeKind::BestPractice)
        .filter_map(|n| n.payload.get("guidance").map(|g| (n.id.as_str(), format!("- {}: {g}", n.label))))
        .collect();
    items.sort();
    if items.is_empty() {
        return "- Follow the architecture above.".into();
    }
    items.into_iter().map(|(_, l)| l).collect::<Vec<_>>().join("\n")
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn pct(v: f64, of: f64) -> String {
    format!("{:.1}%", if of > 0.0 { v / of * 100.0 } else { 0.0 })
}

fn node_lines(out: &mut Vec<String>, tree: &ComponentTree, n: &ComponentNode) {
    let (w, h) = (tree.canvas_width, tree.canvas_height);
    let layout = match n.role {
        NodeRole::Container => "container",
        NodeRole::Leaf => "leaf",
    };
    out.push(format!(
        "node: {} page={} kind={} layout={layout} grid=r{}c{} left={} top={} width={} height={}",
        n.entity_id,
        tree.page_id,
        n.component_kind.as_str(),
        n.grid_row,
        n.grid_col,
        pct(n.bbox.x, w),
        pct(n.bbox.y, h),
        pct(n.bbox.width, w),
        pct(n.bbox.height, h),
    ));
    out.push(format!("  annotated: {}", if n.annotated { "yes" } else { "no" }));
    if let Some(d) = &n.data_binding {
        out.push(format!("  data: {}", one_line(d)));
    }
    for ev in &n.events {
        out.push(format!("  event: {} -> {}", ev.name, one_line(&ev.action)));
    }
    if !n.depends_on.is_empty() {
        out.push(format!("  depends: {}", n.depends_on.join(", ")));
    }
    if let Some(p) = &n.page_ref {
        out.push(format!("  page-link: {p}"));
    }
    for (k, v) in &n.attributes {
        out.push(format!("  attribute: {k}={}", one_line(v)));
    }
    if let Some(t) = &n.text_content {
        out.push(format!("  text: {}", one_line(t)));
    }
    let s = &n.style;
    let mut style = Vec::new();
    if let Some(v) = &s.fill {
        style.push(format!("fill={v}"));
    }
    if let Some(v) = &s.stroke {
        style.push(format!("stroke={v}"));
    }
    if let Some(v) = s.font_size {
        style.push(format!("font-size={v}"));
    }
    if let Some(v) = s.corner_radius {
        style.push(format!("corner-radius={v}"));
    }
    if !style.is_empty() {
        out.push(format!("  style: {}", style.join(" ")));
    }
}

/// The node plus its descendants up to (excluding) nested components.
fn component_nodes<'a>(n: &'a ComponentNode, out: &mut Vec<&'a ComponentNode>) {
    out.push(n);
    for c in &n.children {
        if !c.component_kind.is_componentized() && !c.is_annotation_note() {
            component_nodes(c, out);
        }
    }
}

/// Machine-readable `key: value` block; node details are indented.
fn context_block(step: &GenerationStep, trees: &[ComponentTree], selection: &LibrarySelection) -> String {
    let mut out = vec!["[context]".to_string()];
    out.push(format!("step: {}", step.id));
    out.push(format!("role: {}", step.role));
    out.push(format!("scope: {}", step.scope.as_str()));
    out.push(format!("subject: {}", step.name));
    for id in &step.subject {
        out.push(format!("subject-id: {id}"));
    }
    if let Some(p) = &step.page {
        out.push(format!("page: {p}"));
    }
    for p in &step.expected_paths {
        out.push(format!("file: {p}"));
    }
    for lib in &step.libraries {
        match selection.get(lib).and_then(|e| e.constraint.as_ref()) {
            Some(c) => out.push(format!("library: {lib}@{c}")),
            None => out.push(format!("library: {lib}")),
        }
    }
    for (k, v) in &step.links {
        out.push(format!("{k}: {}", one_line(v)));
    }

    let page_tree = |id: &str| trees.iter().find(|t| t.page_id == id);
    match step.scope {
        Scope::Component => {
            if let (Some(t), Some(id)) = (step.page.as_deref().and_then(page_tree), step.subject.first()) {
                if let Some(n) = t.root.find(id) {
                    let mut nodes = Vec::new();
                    component_nodes(n, &mut nodes);
                    for n in nodes {
                        node_lines(&mut out, t, n);
                    }
                }
            }
        }
        Scope::Page => {
            if let Some(t) = step.page.as_deref().and_then(page_tree) {
                out.push(format!("page-id: {} canvas={}x{}", t.page_id, t.canvas_width, t.canvas_height));
                let wanted = |n: &&ComponentNode| {
                    !n.is_annotation_note() && (step.is_page_view() || step.subject.contains(&n.entity_id))
                };
                for n in t.nodes().into_iter().filter(wanted) {
                    node_lines(&mut out, t, n);
                }
            }
        }
        Scope::Project => {
            let ids: Vec<&str> = step.subject.iter().map(String::as_str).collect();
            for t in trees {
                if ids.contains(&t.page_id.as_str()) {
                    out.push(format!("page-id: {} canvas={}x{}", t.page_id, t.canvas_width, t.canvas_height));
                }
            }
            for t in trees {
                for n in t.nodes().into_iter().filter(|n| ids.contains(&n.entity_id.as_str())) {
                    node_lines(&mut out, t, n);
                }
            }
        }
    }
    out.push("[/context]".into());
    out.join("\n")
}
