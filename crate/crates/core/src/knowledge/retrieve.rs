use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::embed::{cosine, embed};
use super::graph::{CodeSample, KnowledgeGraph, UIElementMapping};
use super::version::VersionConstraint;
use super::KnowledgeError;
use crate::par::Exec;
use crate::tree::{ComponentNode, ComponentTree};
use crate::wireframe::{Annotation, ComponentKind};

/// Added to the cosine score when the query's component kind equals the
/// mapping's. Cosine is at most 1, so annotated intent always ranks first.
pub const EXACT_KIND_BONUS: f64 = 1.0;

/// Retrieval query: free text plus an optional declared component kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub text: String,
    pub kind: Option<ComponentKind>,
}

impl Query {
    pub fn text(text: impl Into<String>) -> Self {
        Query { text: text.into(), kind: None }
    }

    pub fn from_annotation(a: &Annotation) -> Self {
        let mut parts = vec![a.component_kind.as_str().to_string()];
        parts.extend(a.data_binding.iter().cloned());
        for ev in &a.events {
            parts.push(ev.name.clone());
            parts.push(ev.action.clone());
        }
        parts.extend(a.attributes.values().cloned());
        Query { text: parts.join(" "), kind: Some(a.component_kind.clone()) }
    }

    pub fn from_node(n: &ComponentNode) -> Self {
        let mut parts = vec![n.component_kind.as_str().to_string()];
        parts.extend(n.data_binding.iter().cloned());
        for ev in &n.events {
            parts.push(ev.name.clone());
            parts.push(ev.action.clone());
        }
        parts.extend(n.attributes.values().cloned());
        Query { text: parts.join(" "), kind: Some(n.component_kind.clone()) }
    }

    fn kind_matches(&self, m: &UIElementMapping) -> bool {
        match &self.kind {
            Some(ComponentKind::Unknown(t)) if t == ComponentKind::UNKNOWN => false,
            Some(k) => *k == m.component_kind,
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredMapping {
    pub mapping: UIElementMapping,
    pub score: f64,
}

/// Top-`k` mappings by cosine similarity plus the exact-kind bonus, ties by
/// node id.
pub fn retrieve_mappings(
    graph: &KnowledgeGraph,
    query: &Query,
    k: usize,
) -> Result<Vec<ScoredMapping>, KnowledgeError> {
    retrieve_mappings_with(graph, query, k, Exec::default())
}

pub fn retrieve_mappings_with(
    graph: &KnowledgeGraph,
    query: &Query,
    k: usize,
    exec: Exec,
) -> Result<Vec<ScoredMapping>, KnowledgeError> {
    if k == 0 {
        return Err(KnowledgeError::InvalidArgument("k must be at least 1".into()));
    }
    let q = embed(&query.text);
    let mappings = graph.mappings();
    let mut scored: Vec<(usize, f64)> = exec.map_range(mappings.len(), |i| {
        let m = &mappings[i];
        let node = graph.node(&m.node_id).expect("mapping nodes are indexed");
        let bonus = if query.kind_matches(m) { EXACT_KIND_BONUS } else { 0.0 };
        (i, cosine(&q, &node.embedding) + bonus)
    });
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| mappings[a.0].node_id.cmp(&mappings[b.0].node_id)));
    scored.truncate(k);
    Ok(scored.into_iter().map(|(i, score)| ScoredMapping { mapping: mappings[i].clone(), score }).collect())
}

/// Ranked mappings for one componentized node of a page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRetrieval {
    pub page_id: String,
    pub entity_id: String,
    pub ranked: Vec<ScoredMapping>,
}

impl NodeRetrieval {
    pub fn top(&self) -> Option<&UIElementMapping> {
        self.ranked.first().map(|s| &s.mapping)
    }
}

/// Top-`k` mappings for every componentized node of every tree, in tree
/// order then pre-order.
pub fn retrieve_for_trees(
    graph: &KnowledgeGraph,
    trees: &[ComponentTree],
    k: usize,
    exec: Exec,
) -> Result<Vec<NodeRetrieval>, KnowledgeError> {
    let targets: Vec<(&str, &ComponentNode)> = trees
        .iter()
        .flat_map(|t| {
            t.nodes().into_iter().filter(|n| n.component_kind.is_componentized()).map(move |n| (t.page_id.as_str(), n))
        })
        .collect();
    exec.try_map(&targets, |(page, node)| {
        Ok(NodeRetrieval {
            page_id: page.to_string(),
            entity_id: node.entity_id.clone(),
            ranked: retrieve_mappings_with(graph, &Query::from_node(node), k, Exec::Sequential)?,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryEntry {
    pub name: String,
    pub constraint: Option<VersionConstraint>,
    pub purpose: String,
    pub source_mapping: String,
}

/// Deduplicated libraries chosen for a set of component nodes, sorted by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibrarySelection {
    pub entries: Vec<LibraryEntry>,
}

impl LibrarySelection {
    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&LibraryEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

/// Unions the required libraries of each node's top-ranked mapping.
///
/// Same-name constraints are intersected (tighter wins); an empty
/// intersection is a conflict. Inputs are merged in a canonical order so the
/// result does not depend on node order.
pub fn select_libraries(per_node: &[Vec<ScoredMapping>]) -> Result<LibrarySelection, KnowledgeError> {
    let mut wanted: Vec<LibraryEntry> = per_node
        .iter()
        .filter_map(|ranked| ranked.first())
        .flat_map(|top| {
            top.mapping.required_libraries.iter().map(|lib| LibraryEntry {
                name: lib.name.clone(),
                constraint: lib.constraint.clone(),
                purpose: lib.purpose.clone(),
                source_mapping: top.mapping.node_id.clone(),
            })
        })
        .collect();
    wanted.sort_by(|a, b| {
        (a.name.as_str(), a.source_mapping.as_str(), a.constraint.as_ref().map(|c| c.to_string())).cmp(&(
            b.name.as_str(),
            b.source_mapping.as_str(),
            b.constraint.as_ref().map(|c| c.to_string()),
        ))
    });

    let mut merged: BTreeMap<String, LibraryEntry> = BTreeMap::new();
    for entry in wanted {
        match merged.get_mut(&entry.name) {
            None => {
                merged.insert(entry.name.clone(), entry);
            }
            Some(have) => {
                have.constraint = merge_constraints(&entry.name, have.constraint.as_ref(), entry.constraint.as_ref())?;
            }
        }
    }
    Ok(LibrarySelection { entries: merged.into_values().collect() })
}

pub(crate) fn merge_constraints(
    name: &str,
    a: Option<&VersionConstraint>,
    b: Option<&VersionConstraint>,
) -> Result<Option<VersionConstraint>, KnowledgeError> {
    match (a, b) {
        (None, c) | (c, None) => Ok(c.cloned()),
        (Some(x), Some(y)) => x.intersect(y).map(Some).ok_or_else(|| KnowledgeError::Conflict {
            library: name.to_string(),
            first: x.to_string(),
            second: y.to_string(),
        }),
    }
}

/// Samples tagged with `kind` whose stack shares a library with `stack`,
/// ordered by (priority, id) and truncated to `max_n`.
pub fn retrieve_samples<'g, S: AsRef<str>>(
    graph: &'g KnowledgeGraph,
    kind: &str,
    stack: &[S],
    max_n: usize,
) -> Vec<&'g CodeSample> {
    let mut out: Vec<&CodeSample> = graph
        .samples()
        .iter()
        .filter(|s| s.component_kinds.contains(kind))
        .filter(|s| s.stack.iter().any(|lib| stack.iter().any(|x| x.as_ref() == lib)))
        .collect();
    out.sort_by(|a, b| a.priority.cmp(&b.priority).then_with(|| a.id.cmp(&b.id)));
    out.truncate(max_n);
    out
}
