use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{GenerationPlan, GenerationStep, PromptError, Role, Scope, MAX_SAMPLES_PER_STEP};
use crate::knowledge::{KnowledgeGraph, NodeRetrieval};
use crate::tree::{ComponentNode, ComponentTree};

/// `site-map` -> `SiteMap`. Identifiers never start with a digit.
pub fn pascal_case(s: &str) -> String {
    let mut out = String::new();
    for word in s.split(|c: char| !c.is_ascii_alphanumeric()).filter(|w| !w.is_empty()) {
        let mut chars = word.chars();
        if let Some(first) = chars.next() {
            out.push(first.to_ascii_uppercase());
            out.extend(chars);
        }
    }
    if out.is_empty() {
        return "Component".into();
    }
    if out.starts_with(|c: char| c.is_ascii_digit()) {
        out.insert(0, 'C');
    }
    out
}

pub fn camel_case(s: &str) -> String {
    let p = pascal_case(s);
    let mut chars = p.chars();
    match chars.next() {
        Some(first) => first.to_ascii_lowercase().to_string() + chars.as_str(),
        None => p,
    }
}

/// Service module name for a data binding, from its first four words:
/// `tower sensor time series` -> `towerSensorTimeSeriesService`.
pub fn service_name(binding: &str) -> String {
    let words: Vec<String> = binding
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .take(4)
        .map(|w| w.to_ascii_lowercase())
        .collect();
    if words.is_empty() {
        return "dataService".into();
    }
    let mut name = camel_case(&words.join(" "));
    if name.starts_with(|c: char| c.is_ascii_uppercase()) {
        name = format!("data{name}");
    }
    name + "Service"
}

fn kebab(s: &str) -> String {
    s.split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(|w| w.to_ascii_lowercase())
        .collect::<Vec<_>>()
        .join("-")
}

/// Appends 2, 3, ... to names already taken.
fn unique(name: String, taken: &mut BTreeSet<String>) -> String {
    if taken.insert(name.clone()) {
        return name;
    }
    (2..).map(|i| format!("{name}{i}")).find(|n| taken.insert(n.clone())).expect("unbounded")
}

struct Comp<'t> {
    page: usize,
    node: &'t ComponentNode,
    name: String,
    parent: Option<usize>,
    children: Vec<usize>,
    libraries: Vec<String>,
}

fn collect<'t>(node: &'t ComponentNode, page: usize, parent: Option<usize>, out: &mut Vec<Comp<'t>>) {
    let mut next_parent = parent;
    if node.component_kind.is_componentized() {
        let idx = out.len();
        out.push(Comp { page, node, name: String::new(), parent, children: Vec::new(), libraries: Vec::new() });
        if let Some(p) = parent {
            out[p].children.push(idx);
        }
        next_parent = Some(idx);
    }
    for c in &node.children {
        collect(c, page, next_parent, out);
    }
}

fn post_order(comps: &[Comp], roots: &[usize], out: &mut Vec<usize>) {
    for &r in roots {
        post_order(comps, &comps[r].children, out);
        out.push(r);
    }
}

fn samples_for(kb: &KnowledgeGraph, kind: &str, stack: Option<&[String]>) -> Vec<String> {
    let mut hits: Vec<_> = kb
        .samples()
        .iter()
        .filter(|s| s.component_kinds.contains(kind))
        .filter(|s| stack.is_none_or(|st| s.stack.iter().any(|l| st.contains(l))))
        .collect();
    hits.sort_by(|a, b| a.priority.cmp(&b.priority).then_with(|| a.id.cmp(&b.id)));
    hits.into_iter().take(MAX_SAMPLES_PER_STEP).map(|s| s.id.clone()).collect()
}

fn step(id: String, role: Role, scope: Scope, name: &str) -> GenerationStep {
    GenerationStep {
        id,
        role,
        scope,
        name: name.to_string(),
        page: None,
        subject: Vec::new(),
        libraries: Vec::new(),
        sample_refs: Vec::new(),
        expected_paths: Vec::new(),
        depends_on: Vec::new(),
        links: Vec::new(),
    }
}

fn link(k: &str, v: impl Into<String>) -> (String, String) {
    (k.to_string(), v.into())
}

/// Orders the generation steps for a set of page trees.
///
/// Order: scaffold, services (one per distinct data binding), page models,
/// then per page the viewmodels, component views (children first) and the
/// page view, then the stylesheet, and the router last. Every componentized
/// node gets a viewmodel and a view.
pub fn plan_generation(
    trees: &[ComponentTree],
    retrievals: &[NodeRetrieval],
    kb: &KnowledgeGraph,
    token_budget: usize,
) -> Result<GenerationPlan, PromptError> {
    if token_budget == 0 {
        return Err(PromptError::InvalidPlan("token budget must be positive".into()));
    }
    if trees.is_empty() {
        return Ok(GenerationPlan { steps: Vec::new(), token_budget_per_step: token_budget });
    }

    let mut taken = BTreeSet::from(["App".to_string()]);
    let page_names: Vec<String> = trees.iter().map(|t| unique(pascal_case(&t.page_id), &mut taken)).collect();
    let page_views: Vec<String> = page_names.iter().map(|p| unique(format!("{p}Page"), &mut taken)).collect();

    // The entry page is the first one no other page links to.
    let linked: BTreeSet<&str> = trees.iter().flat_map(|t| t.nodes()).filter_map(|n| n.page_ref.as_deref()).collect();
    let root = trees.iter().position(|t| !linked.contains(t.page_id.as_str())).unwrap_or(0);
    let routes: Vec<String> = trees
        .iter()
        .enumerate()
        .map(|(i, t)| if i == root { "/".to_string() } else { format!("/{}", kebab(&t.page_id)) })
        .collect();

    let mut comps: Vec<Comp> = Vec::new();
    let mut page_roots: Vec<Vec<usize>> = Vec::new();
    for (pi, t) in trees.iter().enumerate() {
        let start = comps.len();
        collect(&t.root, pi, None, &mut comps);
        page_roots.push((start..comps.len()).filter(|&i| comps[i].parent.is_none()).collect());
    }

    let base: Vec<String> = comps
        .iter()
        .map(|c| pascal_case(c.node.attributes.get("name").map_or(c.node.entity_id.as_str(), String::as_str)))
        .collect();
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for b in &base {
        *counts.entry(b.as_str()).or_default() += 1;
    }
    let contexts: Vec<String> = page_names.iter().map(|p| format!("{p}Context")).collect();
    for (i, c) in comps.iter_mut().enumerate() {
        let b = &base[i];
        let clash = counts[b.as_str()] > 1 || taken.contains(b) || contexts.contains(b);
        let candidate = if clash { format!("{}{b}", page_names[c.page]) } else { b.clone() };
        c.name = unique(candidate, &mut taken);
    }

    let by_node: HashMap<(&str, &str), &NodeRetrieval> =
        retrievals.iter().map(|r| ((r.page_id.as_str(), r.entity_id.as_str()), r)).collect();
    for c in &mut comps {
        if let Some(m) = by_node.get(&(trees[c.page].page_id.as_str(), c.node.entity_id.as_str())).and_then(|r| r.top())
        {
            c.libraries = m.required_libraries.iter().map(|l| l.name.clone()).collect();
        }
    }

    let mut bindings: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, c) in comps.iter().enumerate() {
        if let Some(b) = c.node.data_binding.as_deref().map(str::trim).filter(|b| !b.is_empty()) {
            bindings.entry(b).or_default().push(i);
        }
    }
    let mut services: Vec<(String, &str, Vec<usize>)> =
        bindings.into_iter().map(|(b, users)| (service_name(b), b, users)).collect();
    services.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut service_taken = BTreeSet::new();
    for s in &mut services {
        s.0 = unique(s.0.clone(), &mut service_taken);
    }
    let service_of: HashMap<usize, &str> =
        services.iter().flat_map(|(name, _, users)| users.iter().map(move |&u| (u, name.as_str()))).collect();

    // Components that read or drive a shared selection.
    let mut involved: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); trees.len()];
    let mut driven: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); trees.len()];
    for (i, c) in comps.iter().enumerate() {
        for dep in &c.node.depends_on {
            if let Some(j) = comps.iter().position(|o| o.page == c.page && &o.node.entity_id == dep) {
                involved[c.page].insert(i);
                involved[c.page].insert(j);
                driven[c.page].insert(j);
            }
        }
    }

    let mut steps = Vec::new();

    let mut s = step("scaffold".into(), Role::Scaffold, Scope::Project, "main");
    s.subject = trees.iter().map(|t| t.page_id.clone()).collect();
    s.sample_refs = samples_for(kb, "scaffold", None);
    s.expected_paths = vec!["src/main.tsx".into()];
    steps.push(s);

    for (name, binding, users) in &services {
        let mut s = step(format!("service:{name}"), Role::Service, Scope::Project, name);
        let mut subject: Vec<String> = Vec::new();
        for &u in users {
            if !subject.contains(&comps[u].node.entity_id) {
                subject.push(comps[u].node.entity_id.clone());
            }
        }
        s.subject = subject;
        s.sample_refs = samples_for(kb, "service", None);
        s.expected_paths = vec![format!("src/services/{name}.ts")];
        s.depends_on = vec!["scaffold".into()];
        s.links = vec![link("binding", *binding), link("endpoint", kebab(binding))];
        steps.push(s);
    }

    for (pi, t) in trees.iter().enumerate() {
        if involved[pi].is_empty() {
            continue;
        }
        let mut s = step(format!("model:{}", t.page_id), Role::Model, Scope::Page, &contexts[pi]);
        s.page = Some(t.page_id.clone());
        s.subject = involved[pi].iter().map(|&i| comps[i].node.entity_id.clone()).collect();
        s.sample_refs = samples_for(kb, "model", None);
        s.expected_paths = vec![format!("src/contexts/{}.tsx", contexts[pi])];
        s.depends_on = vec!["scaffold".into()];
        s.links = driven[pi].iter().map(|&i| link("selection", camel_case(&comps[i].name))).collect();
        steps.push(s);
    }

    let mut all_views = Vec::new();
    for (pi, t) in trees.iter().enumerate() {
        let page = &t.page_id;
        let has_model = !involved[pi].is_empty();
        let members: Vec<usize> = (0..comps.len()).filter(|&i| comps[i].page == pi).collect();

        for &i in &members {
            let c = &comps[i];
            let hook = format!("use{}", c.name);
            let mut s =
                step(format!("viewmodel:{page}:{}", c.node.entity_id), Role::Viewmodel, Scope::Component, &c.name);
            s.page = Some(page.clone());
            s.subject = vec![c.node.entity_id.clone()];
            s.libraries = c.libraries.clone();
            s.sample_refs = samples_for(kb, "viewmodel", None);
            s.expected_paths = vec![format!("src/hooks/{hook}.ts")];
            s.depends_on = vec!["scaffold".into()];
            s.links = vec![link("hook", hook)];
            if let Some(svc) = service_of.get(&i) {
                s.depends_on.push(format!("service:{svc}"));
                s.links.push(link("service", *svc));
            }
            if has_model && involved[pi].contains(&i) {
                s.depends_on.push(format!("model:{page}"));
                s.links.push(link("context", contexts[pi].clone()));
            }
            if driven[pi].contains(&i) {
                s.links.push(link("selection", camel_case(&c.name)));
            }
            let mut handlers = BTreeSet::new();
            for ev in &c.node.events {
                let h = unique(format!("on{}", pascal_case(&ev.name)), &mut handlers);
                s.links.push(link("handler", format!("{h}={}", ev.action)));
            }
            steps.push(s);
        }

        let mut order = Vec::new();
        post_order(&comps, &page_roots[pi], &mut order);
        for &i in &order {
            let c = &comps[i];
            let mut s = step(format!("view:{page}:{}", c.node.entity_id), Role::View, Scope::Component, &c.name);
            s.page = Some(page.clone());
            s.subject = vec![c.node.entity_id.clone()];
            s.libraries = c.libraries.clone();
            let mut stack = c.libraries.clone();
            stack.push("react".into());
            s.sample_refs = samples_for(kb, c.node.component_kind.as_str(), Some(&stack));
            s.expected_paths = vec![format!("src/components/{}.tsx", c.name)];
            s.depends_on = vec![format!("viewmodel:{page}:{}", c.node.entity_id)];
            s.links = vec![link("hook", format!("use{}", c.name))];
            for &ch in &c.children {
                s.depends_on.push(format!("view:{page}:{}", comps[ch].node.entity_id));
                s.links.push(link("component", comps[ch].name.clone()));
            }
            if let Some(target) = c.node.page_ref.as_deref() {
                if let Some(ti) = trees.iter().position(|t| t.page_id == target) {
                    s.links.push(link("target", routes[ti].clone()));
                }
            }
            all_views.push(s.id.clone());
            steps.push(s);
        }

        let mut s = step(format!("page:{page}"), Role::View, Scope::Page, &page_views[pi]);
        s.page = Some(page.clone());
        s.subject = vec![page.clone()];
        s.sample_refs = samples_for(kb, "page", None);
        s.expected_paths = vec![format!("src/components/pages/{}.tsx", page_views[pi])];
        s.links = vec![link("route", routes[pi].clone())];
        for &r in &page_roots[pi] {
            s.depends_on.push(format!("view:{page}:{}", comps[r].node.entity_id));
            s.links.push(link("component", comps[r].name.clone()));
        }
        if has_model {
            s.depends_on.push(format!("model:{page}"));
            s.links.push(link("context", contexts[pi].clone()));
        }
        if s.depends_on.is_empty() {
            s.depends_on.push("scaffold".into());
        }
        steps.push(s);
    }

    let has_styles = !all_views.is_empty();
    if has_styles {
        let mut s = step("styles".into(), Role::Styles, Scope::Project, "app");
        s.subject = trees.iter().map(|t| t.page_id.clone()).collect();
        s.sample_refs = samples_for(kb, "styles", None);
        s.expected_paths = vec!["src/styles/app.css".into()];
        s.depends_on = all_views;
        s.depends_on.extend(trees.iter().map(|t| format!("page:{}", t.page_id)));
        s.links = comps.iter().map(|c| link("component", c.name.clone())).collect();
        s.links.extend(page_views.iter().map(|p| link("page-view", p.clone())));
        steps.push(s);
    }

    let mut s = step("router".into(), Role::Router, Scope::Project, "App");
    s.subject = trees.iter().map(|t| t.page_id.clone()).collect();
    s.libraries = vec!["react-router-dom".into()];
    s.sample_refs = samples_for(kb, "router", None);
    s.expected_paths = vec!["src/App.tsx".into()];
    s.depends_on = vec!["scaffold".into()];
    s.depends_on.extend(trees.iter().map(|t| format!("page:{}", t.page_id)));
    if has_styles {
        s.depends_on.push("styles".into());
        s.links.push(link("stylesheet", "./styles/app.css"));
    }
    for (pi, _) in trees.iter().enumerate() {
        s.links.push(link("route", format!("{}={}", page_views[pi], routes[pi])));
    }
    steps.push(s);

    let plan = GenerationPlan { steps, token_budget_per_step: token_budget };
    plan.check()?;
    Ok(plan)
}
