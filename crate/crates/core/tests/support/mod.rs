//! Independent oracles shared by the integration and acceptance suites.
//! Nothing here calls the code under test's algorithms; each oracle is a
//! direct, slow restatement of the rule it checks.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::Rng;
use sketch2app::knowledge::KnowledgeGraph;
use sketch2app::tree::ComponentTree;
use sketch2app::wireframe::{BBox, ComponentKind, EntityKind, GraphicalEntity, Page, StyleSummary};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/assets/fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures_dir().join(name)
}

pub const FIXTURES: [&str; 3] = ["home.svg", "dashboard.svg", "nested.svg"];

// ---- containment ----

/// Relative containment slack, as a fraction of the canvas diagonal.
pub const TOLERANCE_FRACTION: f64 = 0.01;

/// For each entity: among all others that contain it (within the slack) and
/// outrank it (larger area, or equal area and earlier), the smallest by
/// (area, document order).
pub fn parent_oracle(page: &Page) -> Vec<Option<usize>> {
    let eps = TOLERANCE_FRACTION * (page.canvas_width.powi(2) + page.canvas_height.powi(2)).sqrt();
    let es = &page.entities;
    (0..es.len())
        .map(|c| {
            let a = &es[c].bbox;
            let mut candidates: Vec<usize> = (0..es.len())
                .filter(|&p| p != c)
                .filter(|&p| {
                    let b = &es[p].bbox;
                    a.x + eps >= b.x
                        && a.y + eps >= b.y
                        && a.x + a.width <= b.x + b.width + eps
                        && a.y + a.height <= b.y + b.height + eps
                })
                .filter(|&p| {
                    let (pa, ca) = (es[p].bbox.width * es[p].bbox.height, a.width * a.height);
                    pa > ca || (pa == ca && es[p].doc_order < es[c].doc_order)
                })
                .collect();
            candidates.sort_by(|&x, &y| {
                let ax = es[x].bbox.width * es[x].bbox.height;
                let ay = es[y].bbox.width * es[y].bbox.height;
                ax.partial_cmp(&ay).unwrap().then(es[x].doc_order.cmp(&es[y].doc_order))
            });
            candidates.first().copied()
        })
        .collect()
}

/// Parent entity id of every node in a built tree (`None` = page root).
pub fn tree_parents(tree: &ComponentTree) -> BTreeMap<String, Option<String>> {
    let mut out = BTreeMap::new();
    let mut stack: Vec<(&sketch2app::tree::ComponentNode, Option<String>)> =
        tree.root.children.iter().map(|c| (c, None)).collect();
    while let Some((n, parent)) = stack.pop() {
        out.insert(n.entity_id.clone(), parent);
        stack.extend(n.children.iter().map(|c| (c, Some(n.entity_id.clone()))));
    }
    out
}

pub fn oracle_parents_by_id(page: &Page) -> BTreeMap<String, Option<String>> {
    parent_oracle(page)
        .into_iter()
        .enumerate()
        .map(|(i, p)| (page.entities[i].id.clone(), p.map(|p| page.entities[p].id.clone())))
        .collect()
}

fn entity(i: usize, bbox: BBox) -> GraphicalEntity {
    GraphicalEntity {
        id: format!("e{i}"),
        kind: EntityKind::Rect,
        bbox,
        style: StyleSummary::default(),
        text_content: None,
        annotation: None,
        doc_order: i,
        group_parent: None,
    }
}

/// Rectangles on a 1000x800 canvas: free boxes, boxes nested in earlier
/// ones, exact duplicates and boxes that overhang a container by less than
/// the slack. Coordinates snap to a 5-unit grid so ties occur.
pub fn random_page<R: Rng>(rng: &mut R, n: usize) -> Page {
    let snap = |v: f64| (v / 5.0).round() * 5.0;
    let mut boxes: Vec<BBox> = Vec::with_capacity(n);
    for _ in 0..n {
        let b = match (boxes.is_empty(), rng.gen_range(0..10)) {
            (false, 0..=4) => {
                let p = boxes[rng.gen_range(0..boxes.len())];
                let w = snap(p.width * rng.gen_range(0.1..1.0)).max(5.0);
                let h = snap(p.height * rng.gen_range(0.1..1.0)).max(5.0);
                let x = snap(p.x + rng.gen_range(0.0..=(p.width - w).max(0.0)));
                let y = snap(p.y + rng.gen_range(0.0..=(p.height - h).max(0.0)));
                BBox::new(x, y, w, h)
            }
            (false, 5) => boxes[rng.gen_range(0..boxes.len())],
            (false, 6) => {
                let p = boxes[rng.gen_range(0..boxes.len())];
                let over = rng.gen_range(0.0..9.0);
                BBox::new(p.x - over, p.y, (p.width * 0.5).max(5.0), (p.height * 0.5).max(5.0))
            }
            _ => {
                let w = snap(rng.gen_range(5.0..600.0));
                let h = snap(rng.gen_range(5.0..500.0));
                BBox::new(snap(rng.gen_range(0.0..1000.0 - w)), snap(rng.gen_range(0.0..800.0 - h)), w, h)
            }
        };
        boxes.push(b);
    }
    Page {
        id: "random".into(),
        canvas_width: 1000.0,
        canvas_height: 800.0,
        entities: boxes.into_iter().enumerate().map(|(i, b)| entity(i, b)).collect(),
    }
}

// ---- retrieval ----

const DIM: usize = 256;

fn fnv1a_64(seed: u64, data: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325 ^ seed;
    for b in data {
        h = (h ^ *b as u64).wrapping_mul(0x100000001b3);
    }
    h
}

/// Hashed signed bag of words over lowercase alphanumeric runs, unit length.
pub fn oracle_embed(text: &str) -> [f64; DIM] {
    let mut v = [0.0f64; DIM];
    let lower: Vec<char> = text.chars().collect();
    let mut word = String::new();
    let flush = |w: &mut String, v: &mut [f64; DIM]| {
        if !w.is_empty() {
            let t = w.to_lowercase();
            let slot = (fnv1a_64(0, t.as_bytes()) % DIM as u64) as usize;
            v[slot] += if fnv1a_64(0x9e3779b97f4a7c15, t.as_bytes()).is_multiple_of(2) { 1.0 } else { -1.0 };
            w.clear();
        }
    };
    for c in lower {
        if c.is_alphanumeric() {
            word.push(c);
        } else {
            flush(&mut word, &mut v);
        }
    }
    flush(&mut word, &mut v);
    let len: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if len > 0.0 {
        for x in v.iter_mut() {
            *x /= len;
        }
    }
    v
}

/// Full ranking of every mapping node: cosine of unit vectors plus 1 for an
/// exact kind match; descending score, then node id.
pub fn ranking_oracle(kb: &KnowledgeGraph, text: &str, kind: Option<&ComponentKind>) -> Vec<(String, f64)> {
    let q = oracle_embed(text);
    let mut out: Vec<(String, f64)> = kb
        .mappings()
        .iter()
        .map(|m| {
            let node = kb.node(&m.node_id).unwrap();
            let e = oracle_embed(&node.embedding_text());
            let mut s: f64 = q.iter().zip(e.iter()).map(|(a, b)| a * b).sum();
            if kind == Some(&m.component_kind) {
                s += 1.0;
            }
            (m.node_id.clone(), s)
        })
        .collect();
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    out
}

/// Free-text query drawn from knowledge-base words plus noise words.
pub fn random_query<R: Rng>(rng: &mut R, vocab: &[String]) -> String {
    const NOISE: [&str; 8] = ["zebra", "quantum", "sensor", "tower", "weekly", "7", "north", "filter"];
    let n = rng.gen_range(1..=6);
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.75) {
                vocab[rng.gen_range(0..vocab.len())].clone()
            } else {
                NOISE[rng.gen_range(0..NOISE.len())].to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(if rng.gen_bool(0.5) { " " } else { ", " })
}

pub fn kb_vocabulary(kb: &KnowledgeGraph) -> Vec<String> {
    let mut words: Vec<String> = kb
        .nodes()
        .iter()
        .flat_map(|n| {
            n.embedding_text()
                .split(|c: char| !c.is_alphanumeric())
                .filter(|w| w.len() > 2)
                .map(str::to_lowercase)
                .collect::<Vec<_>>()
        })
        .collect();
    words.sort();
    words.dedup();
    words
}

// ---- ingest ----

/// Entity count by walking the XML directly: supported shape and group
/// elements whose ancestors up to the root are all groups.
pub fn xml_entity_count(svg: &str) -> usize {
    fn walk(n: roxmltree::Node) -> usize {
        n.children()
            .filter(|c| c.is_element())
            .map(|c| match c.tag_name().name() {
                "g" => 1 + walk(c),
                "rect" | "ellipse" | "line" | "text" | "image" => 1,
                _ => 0,
            })
            .sum()
    }
    let doc = roxmltree::Document::parse(svg).expect("fixture is well-formed XML");
    walk(doc.root_element())
}

// ---- response grammar fuzzing ----

/// A path marker value built from escape-prone pieces: parent segments,
/// absolute and drive prefixes, backslashes, home and URL-encoded forms,
/// control characters and plain names.
pub fn adversarial_path<R: Rng>(rng: &mut R) -> String {
    const PREFIX: [&str; 10] = ["", "", "/", "\\", "C:", "c:\\", "~/", "//server/share/", "file:///", "\\\\?\\"];
    const PIECES: [&str; 16] = [
        "..",
        "..",
        ".",
        "src",
        "components",
        "App.tsx",
        "etc",
        "passwd",
        "%2e%2e",
        "..\\..",
        "a b",
        "x.",
        "\u{0}",
        "\t",
        "hooks",
        "...",
    ];
    let mut s = PREFIX[rng.gen_range(0..PREFIX.len())].to_string();
    let n = rng.gen_range(1..=6);
    for i in 0..n {
        if i > 0 {
            s.push(if rng.gen_bool(0.85) { '/' } else { '\\' });
        }
        s.push_str(PIECES[rng.gen_range(0..PIECES.len())]);
    }
    s
}

/// True when `rel` joined onto any root cannot leave it.
pub fn stays_inside(rel: &str) -> bool {
    use std::path::Component;
    let p = std::path::Path::new(rel);
    !rel.is_empty()
        && p.components().all(|c| matches!(c, Component::Normal(_)))
        && !rel.contains('\\')
        && !rel.contains(':')
}
