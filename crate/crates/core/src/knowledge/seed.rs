//! The knowledge base shipped with the crate.

use super::graph::KnowledgeGraph;

/// Source of the bundled knowledge base; sample bodies referenced by
/// `body_path` are embedded alongside it.
pub const SEED_KB_JSON: &str = include_str!("../../assets/kb/seed.json");

const SEED_SAMPLES: &[(&str, &str)] = &[
    ("samples/webmap_leaflet.tsx", include_str!("../../assets/kb/samples/webmap_leaflet.tsx")),
    ("samples/line_chart_highcharts.tsx", include_str!("../../assets/kb/samples/line_chart_highcharts.tsx")),
];

/// Parses the bundled knowledge base. Panics only if the shipped asset is
/// broken, which the test suite guards against.
pub fn seed_graph() -> KnowledgeGraph {
    KnowledgeGraph::from_json_str(SEED_KB_JSON, |rel| {
        SEED_SAMPLES
            .iter()
            .find(|(p, _)| *p == rel)
            .map(|(_, body)| body.to_string())
            .ok_or_else(|| format!("no embedded sample `{rel}`"))
    })
    .expect("bundled knowledge base is valid")
}
