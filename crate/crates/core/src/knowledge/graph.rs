use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::embed::{Embedder, HashedBagOfWords, EMBEDDING_DIM};
use super::version::VersionConstraint;
use super::KnowledgeError;
use crate::wireframe::ComponentKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    ApplicationType,
    KnowledgeDomain,
    SoftwareStack,
    UiElementMapping,
    CodeSample,
    BestPractice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    UsesStack,
    MapsTo,
    HasSample,
    AppliesPractice,
    InDomain,
}

impl Relation {
    fn allows(self, from: NodeKind, to: NodeKind) -> bool {
        use NodeKind::*;
        match self {
            Relation::UsesStack => from == ApplicationType && to == SoftwareStack,
            Relation::InDomain => from == ApplicationType && to == KnowledgeDomain,
            Relation::MapsTo => from == UiElementMapping && to == SoftwareStack,
            Relation::HasSample => {
                matches!(from, UiElementMapping | ApplicationType | BestPractice) && to == CodeSample
            }
            Relation::AppliesPractice => matches!(from, ApplicationType | UiElementMapping) && to == BestPractice,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeNode {
    pub id: String,
    pub kind: NodeKind,
    pub label: String,
    #[serde(default)]
    pub payload: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub embedding: Vec<f64>,
}

impl KnowledgeNode {
    /// Text embedded for retrieval: label followed by payload values in key order.
    pub fn embedding_text(&self) -> String {
        let mut s = self.label.clone();
        for v in self.payload.values() {
            s.push(' ');
            s.push_str(v);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KnowledgeEdge {
    pub from: String,
    pub to: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSample {
    pub id: String,
    pub description: String,
    pub component_kinds: BTreeSet<String>,
    #[serde(default)]
    pub stack: Vec<String>,
    pub body: String,
    #[serde(default)]
    pub priority: u32,
}

/// A library a mapping needs, parsed from `name@constraint (purpose)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequiredLibrary {
    pub name: String,
    pub constraint: Option<VersionConstraint>,
    pub purpose: String,
}

/// Typed view of a `ui-element-mapping` node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UIElementMapping {
    pub node_id: String,
    pub component_kind: ComponentKind,
    pub target_component: String,
    pub required_libraries: Vec<RequiredLibrary>,
    pub supported_events: Vec<String>,
    pub sample_refs: Vec<String>,
    /// Plain built-in element: no third-party library needed.
    pub builtin: bool,
}

/// On-disk form of a sample: inline `body` or a `body_path` relative to the
/// knowledge-base file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SampleDoc {
    id: String,
    description: String,
    component_kinds: BTreeSet<String>,
    #[serde(default)]
    stack: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    body: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    body_path: Option<String>,
    #[serde(default)]
    priority: u32,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
struct KnowledgeDoc {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    nodes: Vec<KnowledgeNode>,
    #[serde(default)]
    edges: Vec<KnowledgeEdge>,
    #[serde(default)]
    samples: Vec<SampleDoc>,
}

/// Immutable, validated knowledge graph.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    metadata: BTreeMap<String, serde_json::Value>,
    nodes: Vec<KnowledgeNode>,
    edges: Vec<KnowledgeEdge>,
    samples: Vec<CodeSample>,
    index: HashMap<String, usize>,
    mappings: Vec<UIElementMapping>,
}

impl PartialEq for KnowledgeGraph {
    /// Multiset equality of nodes, edges and samples.
    fn eq(&self, other: &Self) -> bool {
        fn sorted<T: Clone, K: Ord>(v: &[T], key: impl Fn(&T) -> K) -> Vec<T> {
            let mut v = v.to_vec();
            v.sort_by_key(|x| key(x));
            v
        }
        self.metadata == other.metadata
            && sorted(&self.nodes, |n| n.id.clone()) == sorted(&other.nodes, |n| n.id.clone())
            && sorted(&self.edges, |e| e.clone()) == sorted(&other.edges, |e| e.clone())
            && sorted(&self.samples, |s| s.id.clone()) == sorted(&other.samples, |s| s.id.clone())
    }
}

impl KnowledgeGraph {
    pub fn empty() -> Self {
        Self::from_json_str("{}", |_| unreachable!("no samples")).expect("empty graph is valid")
    }

    /// Loads a knowledge-base file; `body_path` samples resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, KnowledgeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| KnowledgeError::Io { path: path.display().to_string(), source })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json_str(&text, |rel| {
            std::fs::read_to_string(base.join(rel)).map_err(|e| format!("{}: {e}", base.join(rel).display()))
        })
    }

    pub fn from_json_str(
        text: &str,
        resolve_body: impl Fn(&str) -> Result<String, String>,
    ) -> Result<Self, KnowledgeError> {
        Self::from_json_str_with(text, resolve_body, &HashedBagOfWords)
    }

    /// As [`from_json_str`](Self::from_json_str) with a custom embedder for
    /// nodes that carry no stored embedding.
    pub fn from_json_str_with(
        text: &str,
        resolve_body: impl Fn(&str) -> Result<String, String>,
        embedder: &dyn Embedder,
    ) -> Result<Self, KnowledgeError> {
        let doc: KnowledgeDoc = serde_json::from_str(text).map_err(KnowledgeError::Json)?;
        let mut problems = Vec::new();

        let mut samples = Vec::with_capacity(doc.samples.len());
        for s in doc.samples {
            let body = match (s.body, s.body_path) {
                (Some(b), None) => b,
                (None, Some(p)) => match resolve_body(&p) {
                    Ok(b) => b,
                    Err(e) => {
                        problems.push(format!("sample `{}`: cannot read body_path: {e}", s.id));
                        continue;
                    }
                },
                _ => {
                    problems.push(format!("sample `{}`: exactly one of body or body_path is required", s.id));
                    continue;
                }
            };
            if body.trim().is_empty() {
                problems.push(format!("sample `{}`: empty body", s.id));
            }
            samples.push(CodeSample {
                id: s.id,
                description: s.description,
                component_kinds: s.component_kinds,
                stack: s.stack,
                body,
                priority: s.priority,
            });
        }

        let mut nodes = doc.nodes;
        for n in &mut nodes {
            if n.embedding.is_empty() {
                n.embedding = embedder.embed(&n.embedding_text());
            }
            if n.embedding.len() != EMBEDDING_DIM || n.embedding.iter().any(|x| !x.is_finite()) {
                problems.push(format!(
                    "node `{}`: embedding must have {EMBEDDING_DIM} finite values, got {}",
                    n.id,
                    n.embedding.len()
                ));
            }
        }

        let mut index = HashMap::new();
        let mut kinds: HashMap<&str, NodeKind> = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if index.insert(n.id.clone(), i).is_some() {
                problems.push(format!("duplicate id `{}`", n.id));
            }
            kinds.insert(&n.id, n.kind);
        }
        for s in &samples {
            if kinds.insert(&s.id, NodeKind::CodeSample).is_some() {
                problems.push(format!("duplicate id `{}`", s.id));
            }
        }
        for e in &doc.edges {
            match (kinds.get(e.from.as_str()), kinds.get(e.to.as_str())) {
                (Some(&f), Some(&t)) => {
                    if !e.relation.allows(f, t) {
                        problems.push(format!(
                            "edge {} -[{:?}]-> {}: relation does not connect {:?} to {:?}",
                            e.from, e.relation, e.to, f, t
                        ));
                    }
                }
                _ => problems.push(format!("dangling edge {} -[{:?}]-> {}", e.from, e.relation, e.to)),
            }
        }

        let mut mappings = Vec::new();
        for n in nodes.iter().filter(|n| n.kind == NodeKind::UiElementMapping) {
            match parse_mapping(n, &doc.edges) {
                Ok(m) => mappings.push(m),
                Err(e) => problems.push(format!("mapping `{}`: {e}", n.id)),
            }
        }
        mappings.sort_by(|a, b| a.node_id.cmp(&b.node_id));

        if !problems.is_empty() {
            return Err(KnowledgeError::Integrity(problems));
        }
        Ok(KnowledgeGraph { metadata: doc.metadata, nodes, edges: doc.edges, samples, index, mappings })
    }

    /// Serializes the graph with inline sample bodies and stored embeddings.
    pub fn to_json_string(&self) -> String {
        let doc = KnowledgeDoc {
            metadata: self.metadata.clone(),
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
            samples: self
                .samples
                .iter()
                .map(|s| SampleDoc {
                    id: s.id.clone(),
                    description: s.description.clone(),
                    component_kinds: s.component_kinds.clone(),
                    stack: s.stack.clone(),
                    body: Some(s.body.clone()),
                    body_path: None,
                    priority: s.priority,
                })
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("knowledge graph serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), KnowledgeError> {
        std::fs::write(path, self.to_json_string())
            .map_err(|source| KnowledgeError::Io { path: path.display().to_string(), source })
    }

    pub fn metadata(&self) -> &BTreeMap<String, serde_json::Value> {
        &self.metadata
    }

    pub fn nodes(&self) -> &[KnowledgeNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[KnowledgeEdge] {
        &self.edges
    }

    pub fn samples(&self) -> &[CodeSample] {
        &self.samples
    }

    pub fn mappings(&self) -> &[UIElementMapping] {
        &self.mappings
    }

    pub fn node(&self, id: &str) -> Option<&KnowledgeNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn nodes_of(&self, kind: NodeKind) -> impl Iterator<Item = &KnowledgeNode> {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty() && self.samples.is_empty()
    }
}

fn parse_mapping(node: &KnowledgeNode, edges: &[KnowledgeEdge]) -> Result<UIElementMapping, String> {
    let p = &node.payload;
    let kind = p.get("component_kind").ok_or("missing payload key `component_kind`")?;
    let builtin = p.get("builtin").is_some_and(|v| v == "true");
    let required_libraries = match p.get("libraries") {
        Some(raw) => parse_libraries(raw)?,
        None => Vec::new(),
    };
    if required_libraries.is_empty() && !builtin {
        return Err("required libraries are empty and the mapping is not marked builtin".into());
    }
    let mut sample_refs: Vec<String> =
        edges.iter().filter(|e| e.from == node.id && e.relation == Relation::HasSample).map(|e| e.to.clone()).collect();
    sample_refs.sort();
    Ok(UIElementMapping {
        node_id: node.id.clone(),
        component_kind: ComponentKind::parse(kind),
        target_component: p.get("target_component").cloned().unwrap_or_else(|| node.label.clone()),
        required_libraries,
        supported_events: split_list(p.get("events").map(String::as_str).unwrap_or("")),
        sample_refs,
        builtin,
    })
}

pub(crate) fn split_list(raw: &str) -> Vec<String> {
    raw.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// Parses `name@constraint (purpose); name (purpose); ...`. Scoped package
/// names (`@mui/material@^5.16.0`) split on the last `@`.
pub fn parse_libraries(raw: &str) -> Result<Vec<RequiredLibrary>, String> {
    let mut out = Vec::new();
    for item in raw.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (spec, purpose) = match item.find('(') {
            Some(open) => {
                let close = item.rfind(')').filter(|&c| c > open).ok_or(format!("unbalanced `(` in `{item}`"))?;
                (item[..open].trim(), item[open + 1..close].trim())
            }
            None => (item, ""),
        };
        let (name, constraint) = match spec.rfind('@').filter(|&i| i > 0) {
            Some(i) => {
                let c: VersionConstraint = spec[i + 1..].parse().map_err(|e| format!("{e}"))?;
                (spec[..i].trim(), Some(c))
            }
            None => (spec, None),
        };
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(format!("invalid library name in `{item}`"));
        }
        out.push(RequiredLibrary { name: name.to_string(), constraint, purpose: purpose.to_string() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_files(_: &str) -> Result<String, String> {
        Err("no files".into())
    }

    #[test]
    fn empty_document() {
        let g = KnowledgeGraph::from_json_str(r#"{"nodes": [], "edges": []}"#, no_files).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn dangling_edge_is_named() {
        let err = KnowledgeGraph::from_json_str(
            r#"{"nodes":[{"id":"a","kind":"application-type","label":"A"}],
                "edges":[{"from":"a","to":"ghost","relation":"uses-stack"}]}"#,
            no_files,
        )
        .unwrap_err();
        match err {
            KnowledgeError::Integrity(p) => {
                assert_eq!(p.len(), 1);
                assert!(p[0].contains("a -[UsesStack]-> ghost"), "{}", p[0]);
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn duplicate_ids_and_bad_relations() {
        let err = KnowledgeGraph::from_json_str(
            r#"{"nodes":[{"id":"a","kind":"application-type","label":"A"},
                         {"id":"a","kind":"software-stack","label":"B"},
                         {"id":"d","kind":"knowledge-domain","label":"D"}],
                "edges":[{"from":"a","to":"d","relation":"uses-stack"}]}"#,
            no_files,
        )
        .unwrap_err();
        let KnowledgeError::Integrity(p) = err else { panic!() };
        assert!(p.iter().any(|x| x.contains("duplicate id `a`")));
    }

    #[test]
    fn bad_embedding_length() {
        let err = KnowledgeGraph::from_json_str(
            r#"{"nodes":[{"id":"a","kind":"application-type","label":"A","embedding":[1.0,0.0]}]}"#,
            no_files,
        )
        .unwrap_err();
        assert!(matches!(err, KnowledgeError::Integrity(_)));
    }

    #[test]
    fn mapping_needs_libraries_unless_builtin() {
        let bad =
            r#"{"nodes":[{"id":"m","kind":"ui-element-mapping","label":"M","payload":{"component_kind":"webmap"}}]}"#;
        assert!(KnowledgeGraph::from_json_str(bad, no_files).is_err());
        let ok = r#"{"nodes":[{"id":"m","kind":"ui-element-mapping","label":"M","payload":{"component_kind":"button","builtin":"true"}}]}"#;
        let g = KnowledgeGraph::from_json_str(ok, no_files).unwrap();
        assert!(g.mappings()[0].builtin);
    }

    #[test]
    fn library_strings() {
        let libs = parse_libraries("leaflet@^1.9.4 (map engine); @mui/material@^5.16.0 (widgets); dayjs").unwrap();
        assert_eq!(libs.len(), 3);
        assert_eq!(libs[0].name, "leaflet");
        assert_eq!(libs[0].constraint, Some("^1.9.4".parse().unwrap()));
        assert_eq!(libs[0].purpose, "map engine");
        assert_eq!(libs[1].name, "@mui/material");
        assert_eq!(libs[2].constraint, None);
        assert!(parse_libraries("bad name@1.0").is_err());
        assert!(parse_libraries("x@^bad").is_err());
    }

    #[test]
    fn body_path_resolution() {
        let doc = r#"{"samples":[{"id":"s","description":"d","component_kinds":["webmap"],"body_path":"x.tsx"}]}"#;
        let g = KnowledgeGraph::from_json_str(doc, |p| Ok(format!("// {p}\n"))).unwrap();
        assert_eq!(g.samples()[0].body, "// x.tsx\n");
        assert!(KnowledgeGraph::from_json_str(doc, no_files).is_err());
    }
}
