mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sketch2app::knowledge::{retrieve_mappings_with, seed_graph, KnowledgeGraph, Query, SEED_KB_JSON};
use sketch2app::par::Exec;
use sketch2app::tree::{assign_parents, build_tree_with};
use sketch2app::wireframe::{page_contexts, read_wireframe, ComponentKind};
use support::*;

#[test]
fn containment_matches_oracle_on_fixtures() {
    for name in FIXTURES {
        let doc = read_wireframe(&fixture(name)).unwrap();
        let page = &doc.pages[0];
        let expected = parent_oracle(page);
        assert_eq!(assign_parents(page, Exec::Sequential), expected, "{name}");
        assert_eq!(assign_parents(page, Exec::Parallel), expected, "{name}");
        let tree = build_tree_with(page, &page_contexts(page), Exec::Sequential).unwrap();
        assert_eq!(tree_parents(&tree), oracle_parents_by_id(page), "{name}");
    }
}

#[test]
fn fixture_parents_by_hand() {
    let doc = read_wireframe(&fixture("nested.svg")).unwrap();
    let p = oracle_parents_by_id(&doc.pages[0]);
    let parent = |id: &str| p[id].as_deref();
    assert_eq!(parent("frame"), None);
    assert_eq!(parent("sidebar"), Some("frame"));
    assert_eq!(parent("year-slider"), Some("sidebar"));
    assert_eq!(parent("gallery"), Some("main"));
    for t in ["thumb-a", "thumb-b", "thumb-c", "thumb-d"] {
        assert_eq!(parent(t), Some("gallery"));
    }
}

#[test]
fn containment_matches_oracle_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    for round in 0..200 {
        let n = rng.gen_range(1..=50);
        let page = random_page(&mut rng, n);
        let expected = parent_oracle(&page);
        assert_eq!(assign_parents(&page, Exec::Sequential), expected, "round {round}");
        assert_eq!(assign_parents(&page, Exec::Parallel), expected, "round {round}");
        let tree = build_tree_with(&page, &page_contexts(&page), Exec::Sequential).unwrap();
        assert_eq!(tree_parents(&tree), oracle_parents_by_id(&page), "round {round}");
    }
}

fn assert_ranking_matches(kb: &KnowledgeGraph, text: &str, kind: Option<ComponentKind>) {
    let expected = ranking_oracle(kb, text, kind.as_ref());
    let got = retrieve_mappings_with(kb, &Query { text: text.into(), kind }, expected.len(), Exec::Sequential).unwrap();
    assert_eq!(got.len(), expected.len());
    for (i, (g, (id, score))) in got.iter().zip(&expected).enumerate() {
        assert!((g.score - score).abs() < 1e-9, "{text:?} #{i}: {} vs {score}", g.score);
        // near-ties may legitimately order by id either way after rounding
        let tied = expected.iter().filter(|(_, s)| (s - score).abs() < 1e-9).count() > 1;
        if !tied {
            assert_eq!(&g.mapping.node_id, id, "{text:?} #{i}");
        }
    }
}

#[test]
fn retrieval_ranking_matches_cosine_oracle() {
    let kb = seed_graph();
    let vocab = kb_vocabulary(&kb);
    let kinds: Vec<ComponentKind> = kb.mappings().iter().map(|m| m.component_kind.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for _ in 0..50 {
        let text = random_query(&mut rng, &vocab);
        let kind = rng.gen_bool(0.3).then(|| kinds[rng.gen_range(0..kinds.len())].clone());
        assert_ranking_matches(&kb, &text, kind);
    }
}

#[test]
fn seed_stack_queries() {
    let kb = seed_graph();
    let top = |q: Query| retrieve_mappings_with(&kb, &q, 1, Exec::Sequential).unwrap().remove(0).mapping;
    let map = top(Query { text: "map".into(), kind: Some(ComponentKind::Webmap) });
    assert!(map.required_libraries.iter().any(|l| l.name == "leaflet"));
    let chart = top(Query::text("time series chart"));
    let charting = ["leaflet", "d3", "highcharts"];
    assert!(chart.required_libraries.iter().any(|l| charting.contains(&l.name.as_str())), "{chart:?}");
}

#[test]
fn fixture_entity_counts_match_xml_walk() {
    let frozen = [("home.svg", 5), ("dashboard.svg", 13), ("nested.svg", 12)];
    for (name, count) in frozen {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let doc = read_wireframe(&fixture(name)).unwrap();
        assert_eq!(doc.pages[0].entities.len(), xml_entity_count(&text), "{name}");
        assert_eq!(doc.pages[0].entities.len(), count, "{name}");
    }
}

#[test]
fn seed_kb_survives_save_and_load() {
    let kb = seed_graph();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kb.json");
    kb.save(&path).unwrap();
    let again = KnowledgeGraph::load(&path).unwrap();
    assert_eq!(again.nodes(), kb.nodes());
    assert_eq!(again.edges(), kb.edges());
    assert_eq!(again.to_json_string(), kb.to_json_string());
    again.save(&path).unwrap();
    assert_eq!(KnowledgeGraph::load(&path).unwrap().to_json_string(), kb.to_json_string());
    assert!(SEED_KB_JSON.contains("\"app.urban-digital-twins\""));
}
