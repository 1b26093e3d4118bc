//! Component tree inference: containment hierarchy plus a coarse row/column
//! grid for the children of every container.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::Exec;
use crate::wireframe::{
    page_contexts, BBox, ComponentKind, EntityKind, EventBinding, Page, StyleSummary, VisualContext, WireframeDocument,
};

/// Containment slack as a fraction of the canvas diagonal.
pub const CONTAINMENT_TOLERANCE: f64 = 0.01;
/// Top-edge gap, in percent of canvas height, that starts a new grid row.
pub const ROW_GAP_PCT: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeRole {
    Container,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentNode {
    pub entity_id: String,
    pub component_kind: ComponentKind,
    pub role: NodeRole,
    pub grid_row: usize,
    pub grid_col: usize,
    pub bbox: BBox,
    pub doc_order: usize,
    /// True when the entity carried an explicit annotation.
    pub annotated: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventBinding>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depends_on: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_binding: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_ref: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "StyleSummary::is_empty")]
    pub style: StyleSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_content: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<ComponentNode>,
}

impl ComponentNode {
    /// Pre-order walk, including `self`.
    pub fn walk(&self) -> Vec<&ComponentNode> {
        fn rec<'a>(n: &'a ComponentNode, out: &mut Vec<&'a ComponentNode>) {
            out.push(n);
            for c in &n.children {
                rec(c, out);
            }
        }
        let mut out = Vec::new();
        rec(self, &mut out);
        out
    }

    /// `@`-prefixed text that annotated a sibling: metadata, not page content.
    pub fn is_annotation_note(&self) -> bool {
        self.component_kind == ComponentKind::TextLabel
            && !self.annotated
            && self.text_content.as_deref().is_some_and(|t| t.trim_start().starts_with('@'))
    }

    pub fn find(&self, entity_id: &str) -> Option<&ComponentNode> {
        if self.entity_id == entity_id {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(entity_id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentTree {
    pub page_id: String,
    pub canvas_width: f64,
    pub canvas_height: f64,
    /// Synthetic page root (`component_kind = page`), never an entity.
    pub root: ComponentNode,
}

impl ComponentTree {
    /// All entity nodes in pre-order, excluding the synthetic root.
    pub fn nodes(&self) -> Vec<&ComponentNode> {
        self.root.walk().into_iter().skip(1).collect()
    }

    pub fn tolerance(&self) -> f64 {
        CONTAINMENT_TOLERANCE * self.canvas_width.hypot(self.canvas_height)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("page `{page}`: duplicate entity id `{id}`")]
    DuplicateEntity { page: String, id: String },
    #[error("page `{page}`: no visual context for entity `{id}`")]
    MissingContext { page: String, id: String },
}

/// Index of each entity's parent (`None` = page root).
///
/// The parent is the smallest-area entity whose box contains the child within
/// the tolerance and that outranks it: strictly larger area, or equal area and
/// earlier in document order. Equal-area ties go to the earlier entity.
pub fn assign_parents(page: &Page, exec: Exec) -> Vec<Option<usize>> {
    let eps = CONTAINMENT_TOLERANCE * page.diagonal();
    let es = &page.entities;
    exec.map_range(es.len(), |c| {
        let child = &es[c];
        let child_area = child.bbox.area();
        let mut best: Option<usize> = None;
        for (p, cand) in es.iter().enumerate() {
            if p == c {
                continue;
            }
            let area = cand.bbox.area();
            let outranks = area > child_area || (area == child_area && cand.doc_order < child.doc_order);
            if !outranks || !cand.bbox.contains_within(&child.bbox, eps) {
                continue;
            }
            best = match best {
                None => Some(p),
                Some(b) => {
                    let barea = es[b].bbox.area();
                    if area < barea || (area == barea && cand.doc_order < es[b].doc_order) {
                        Some(p)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best
    })
}

pub fn build_tree(page: &Page, contexts: &[VisualContext]) -> Result<ComponentTree, TreeError> {
    build_tree_with(page, contexts, Exec::default())
}

pub fn build_tree_with(page: &Page, contexts: &[VisualContext], exec: Exec) -> Result<ComponentTree, TreeError> {
    let mut seen = HashSet::new();
    for e in &page.entities {
        if !seen.insert(e.id.as_str()) {
            return Err(TreeError::DuplicateEntity { page: page.id.clone(), id: e.id.clone() });
        }
    }
    let ctx: HashMap<&str, &VisualContext> = contexts.iter().map(|c| (c.entity_id.as_str(), c)).collect();
    if let Some(e) = page.entities.iter().find(|e| !ctx.contains_key(e.id.as_str())) {
        return Err(TreeError::MissingContext { page: page.id.clone(), id: e.id.clone() });
    }

    let parents = assign_parents(page, exec);
    let mut kids: Vec<Vec<usize>> = vec![Vec::new(); page.entities.len()];
    let mut top = Vec::new();
    for (i, p) in parents.iter().enumerate() {
        match p {
            Some(p) => kids[*p].push(i),
            None => top.push(i),
        }
    }

    fn make(page: &Page, i: usize, kids: &[Vec<usize>]) -> ComponentNode {
        let e = &page.entities[i];
        let children: Vec<ComponentNode> = kids[i].iter().map(|&k| make(page, k, kids)).collect();
        let ann = e.annotation.as_ref();
        ComponentNode {
            entity_id: e.id.clone(),
            component_kind: e.component_kind(),
            role: if children.is_empty() && e.kind != EntityKind::Group { NodeRole::Leaf } else { NodeRole::Container },
            grid_row: 0,
            grid_col: 0,
            bbox: e.bbox,
            doc_order: e.doc_order,
            annotated: ann.is_some(),
            events: ann.map(|a| a.events.clone()).unwrap_or_default(),
            depends_on: ann.map(|a| a.depends_on.clone()).unwrap_or_default(),
            data_binding: ann.and_then(|a| a.data_binding.clone()),
            page_ref: ann.and_then(|a| a.page_ref.clone()),
            attributes: ann.map(|a| a.attributes.clone()).unwrap_or_default(),
            style: e.style.clone(),
            text_content: e.text_content.clone(),
            children,
        }
    }

    let mut root = ComponentNode {
        entity_id: page.id.clone(),
        component_kind: ComponentKind::Page,
        role: NodeRole::Container,
        grid_row: 0,
        grid_col: 0,
        bbox: BBox::new(0.0, 0.0, page.canvas_width, page.canvas_height),
        doc_order: 0,
        annotated: false,
        events: Vec::new(),
        depends_on: Vec::new(),
        data_binding: None,
        page_ref: None,
        attributes: BTreeMap::new(),
        style: StyleSummary::default(),
        text_content: None,
        children: top.iter().map(|&i| make(page, i, &kids)).collect(),
    };
    layout_recursive(&mut root, &ctx);

    Ok(ComponentTree {
        page_id: page.id.clone(),
        canvas_width: page.canvas_width,
        canvas_height: page.canvas_height,
        root,
    })
}

/// Builds one tree per page.
pub fn build_trees(doc: &WireframeDocument, exec: Exec) -> Result<Vec<ComponentTree>, TreeError> {
    exec.try_map(&doc.pages, |p| build_tree_with(p, &page_contexts(p), Exec::Sequential))
}

fn layout_recursive(node: &mut ComponentNode, ctx: &HashMap<&str, &VisualContext>) {
    if !node.children.is_empty() {
        infer_grid(node, ctx);
    }
    for c in &mut node.children {
        layout_recursive(c, ctx);
    }
}

/// Assigns `grid_row`/`grid_col` to the children of `node` and sorts them by
/// (row, col, doc_order).
///
/// Rows are single-linkage clusters of top edges: a sorted top that sits more
/// than [`ROW_GAP_PCT`] below the previous one opens a new row. Columns are
/// the left-edge rank within a row.
pub fn infer_grid(node: &mut ComponentNode, ctx: &HashMap<&str, &VisualContext>) {
    let pos = |n: &ComponentNode| -> (f64, f64) {
        ctx.get(n.entity_id.as_str()).map(|c| (c.top_pct, c.left_pct)).unwrap_or((0.0, 0.0))
    };
    let mut order: Vec<usize> = (0..node.children.len()).collect();
    order.sort_by(|&a, &b| {
        let (ta, _) = pos(&node.children[a]);
        let (tb, _) = pos(&node.children[b]);
        ta.total_cmp(&tb).then(node.children[a].doc_order.cmp(&node.children[b].doc_order))
    });

    let mut rows: Vec<Vec<usize>> = Vec::new();
    let mut prev_top = f64::NEG_INFINITY;
    for i in order {
        let (top, _) = pos(&node.children[i]);
        if rows.is_empty() || top - prev_top > ROW_GAP_PCT {
            rows.push(Vec::new());
        }
        rows.last_mut().unwrap().push(i);
        prev_top = top;
    }

    for (r, row) in rows.iter_mut().enumerate() {
        row.sort_by(|&a, &b| {
            let (_, la) = pos(&node.children[a]);
            let (_, lb) = pos(&node.children[b]);
            la.total_cmp(&lb).then(node.children[a].doc_order.cmp(&node.children[b].doc_order))
        });
        for (c, &i) in row.iter().enumerate() {
            node.children[i].grid_row = r;
            node.children[i].grid_col = c;
        }
    }
    node.children.sort_by_key(|n| (n.grid_row, n.grid_col, n.doc_order));
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDiagnostic {
    pub rule: String,
    pub entity_id: String,
    pub message: String,
}

/// Checks the tree invariants; an empty list means the tree is sound.
///
/// Children of the synthetic root are not checked against the canvas, since
/// sketches routinely spill past the page edge.
pub fn validate_tree(tree: &ComponentTree) -> Vec<TreeDiagnostic> {
    let mut out = Vec::new();
    let mut diag = |rule: &str, id: &str, message: String| {
        out.push(TreeDiagnostic { rule: rule.into(), entity_id: id.into(), message })
    };
    if tree.root.component_kind != ComponentKind::Page {
        diag("root-kind", &tree.root.entity_id, "tree root is not a page node".into());
    }
    let eps = tree.tolerance();
    let mut seen = HashSet::new();
    let mut stack: Vec<(&ComponentNode, bool)> = vec![(&tree.root, true)];
    while let Some((node, is_root)) = stack.pop() {
        if !is_root && !seen.insert(node.entity_id.as_str()) {
            diag("duplicate-entity", &node.entity_id, format!("entity `{}` appears more than once", node.entity_id));
        }
        if node.role == NodeRole::Leaf && !node.children.is_empty() {
            diag("leaf-with-children", &node.entity_id, format!("leaf `{}` has children", node.entity_id));
        }
        for c in &node.children {
            if !is_root && !node.bbox.contains_within(&c.bbox, eps) {
                diag(
                    "containment",
                    &c.entity_id,
                    format!("`{}` lies outside its parent `{}`", c.entity_id, node.entity_id),
                );
            }
        }
        for pair in node.children.windows(2) {
            let k = |n: &ComponentNode| (n.grid_row, n.grid_col, n.doc_order);
            if k(&pair[0]) > k(&pair[1]) {
                diag(
                    "sibling-order",
                    &pair[1].entity_id,
                    format!("`{}` is out of (row, col, doc_order) order", pair[1].entity_id),
                );
            }
        }
        for c in node.children.iter().rev() {
            stack.push((c, false));
        }
    }
    out
}

/// Indented outline, one node per line.
pub fn render_outline(tree: &ComponentTree) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "page {} ({}x{})", tree.page_id, tree.canvas_width, tree.canvas_height);
    fn rec(s: &mut String, n: &ComponentNode, depth: usize) {
        let _ = writeln!(
            s,
            "{}- {} [{}] {} r{}c{} @({},{} {}x{})",
            "  ".repeat(depth),
            n.entity_id,
            n.component_kind,
            match n.role {
                NodeRole::Container => "container",
                NodeRole::Leaf => "leaf",
            },
            n.grid_row,
            n.grid_col,
            n.bbox.x,
            n.bbox.y,
            n.bbox.width,
            n.bbox.height
        );
        for c in &n.children {
            rec(s, c, depth + 1);
        }
    }
    for c in &tree.root.children {
        rec(&mut s, c, 1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wireframe::{GraphicalEntity, StyleSummary};

    fn ent(id: &str, order: usize, b: (f64, f64, f64, f64)) -> GraphicalEntity {
        GraphicalEntity {
            id: id.into(),
            kind: EntityKind::Rect,
            bbox: BBox::new(b.0, b.1, b.2, b.3),
            style: StyleSummary::default(),
            text_content: None,
            annotation: None,
            doc_order: order,
            group_parent: None,
        }
    }

    fn page(es: Vec<GraphicalEntity>) -> Page {
        Page { id: "p".into(), canvas_width: 1000.0, canvas_height: 800.0, entities: es }
    }

    #[test]
    fn strict_containment() {
        let p = page(vec![ent("A", 0, (0.0, 0.0, 1000.0, 800.0)), ent("B", 1, (100.0, 100.0, 300.0, 200.0))]);
        let t = build_tree(&p, &page_contexts(&p)).unwrap();
        assert_eq!(t.root.children.len(), 1);
        assert_eq!(t.root.children[0].entity_id, "A");
        assert_eq!(t.root.children[0].children[0].entity_id, "B");
        assert_eq!(t.root.children[0].role, NodeRole::Container);
        assert_eq!(t.root.children[0].children[0].role, NodeRole::Leaf);
        assert!(validate_tree(&t).is_empty());
    }

    #[test]
    fn single_entity() {
        let p = page(vec![ent("A", 0, (10.0, 10.0, 10.0, 10.0))]);
        let t = build_tree(&p, &page_contexts(&p)).unwrap();
        assert_eq!(t.root.children.len(), 1);
        assert_eq!(t.root.component_kind, ComponentKind::Page);
    }

    #[test]
    fn equal_boxes_resolve_to_earlier_parent() {
        let p = page(vec![ent("late", 1, (5.0, 5.0, 50.0, 50.0)), ent("early", 0, (5.0, 5.0, 50.0, 50.0))]);
        let parents = assign_parents(&p, Exec::Sequential);
        assert_eq!(parents, vec![Some(1), None]);
    }

    #[test]
    fn near_equal_boxes_larger_wins() {
        // mutual containment within tolerance; the larger box is the parent
        let p = page(vec![ent("small", 0, (5.0, 5.0, 50.0, 50.0)), ent("big", 1, (4.0, 4.0, 52.0, 52.0))]);
        assert_eq!(assign_parents(&p, Exec::Sequential), vec![Some(1), None]);
    }

    #[test]
    fn sloppy_nesting_within_tolerance() {
        // 1% of the 1000x800 diagonal is ~12.8 units
        let p = page(vec![ent("panel", 0, (100.0, 100.0, 400.0, 300.0)), ent("btn", 1, (95.0, 110.0, 100.0, 40.0))]);
        assert_eq!(assign_parents(&p, Exec::Sequential), vec![None, Some(0)]);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let p = page(vec![ent("A", 0, (0.0, 0.0, 1.0, 1.0)), ent("A", 1, (0.0, 0.0, 1.0, 1.0))]);
        assert!(matches!(build_tree(&p, &page_contexts(&p)), Err(TreeError::DuplicateEntity { .. })));
    }

    #[test]
    fn missing_context_is_rejected() {
        let p = page(vec![ent("A", 0, (0.0, 0.0, 1.0, 1.0))]);
        assert!(matches!(build_tree(&p, &[]), Err(TreeError::MissingContext { .. })));
    }

    #[test]
    fn rows_by_top_gap() {
        // tops 10%, 10.5%, 60% of 800
        let p = page(vec![
            ent("a", 0, (500.0, 80.0, 10.0, 10.0)),
            ent("b", 1, (100.0, 84.0, 10.0, 10.0)),
            ent("c", 2, (300.0, 480.0, 10.0, 10.0)),
        ]);
        let t = build_tree(&p, &page_contexts(&p)).unwrap();
        let got: Vec<_> = t.root.children.iter().map(|n| (n.entity_id.as_str(), n.grid_row, n.grid_col)).collect();
        assert_eq!(got, vec![("b", 0, 0), ("a", 0, 1), ("c", 1, 0)]);
    }

    #[test]
    fn singleton_grid() {
        let p = page(vec![ent("a", 0, (500.0, 80.0, 10.0, 10.0))]);
        let t = build_tree(&p, &page_contexts(&p)).unwrap();
        assert_eq!((t.root.children[0].grid_row, t.root.children[0].grid_col), (0, 0));
    }

    #[test]
    fn validate_flags_duplicates_and_containment() {
        let p = page(vec![ent("A", 0, (0.0, 0.0, 500.0, 500.0)), ent("B", 1, (10.0, 10.0, 50.0, 50.0))]);
        let t = build_tree(&p, &page_contexts(&p)).unwrap();

        let mut dup = t.clone();
        let b = dup.root.children[0].children[0].clone();
        dup.root.children.push(b);
        let d = validate_tree(&dup);
        assert_eq!(d.iter().filter(|x| x.rule == "duplicate-entity").count(), 1);
        assert_eq!(d.iter().filter(|x| x.rule == "containment").count(), 0);

        let mut out = t.clone();
        out.root.children[0].children[0].bbox = BBox::new(600.0, 600.0, 50.0, 50.0);
        let d = validate_tree(&out);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].rule, "containment");
        assert_eq!(d[0].entity_id, "B");
    }

    #[test]
    fn outline_lists_nodes() {
        let p = page(vec![ent("A", 0, (0.0, 0.0, 1000.0, 800.0)), ent("B", 1, (100.0, 100.0, 300.0, 200.0))]);
        let t = build_tree(&p, &page_contexts(&p)).unwrap();
        let o = render_outline(&t);
        assert_eq!(
            o,
            "page p (1000x800)\n  - A [panel] container r0c0 @(0,0 1000x800)\n    - B [panel] leaf r0c0 @(100,100 300x200)\n"
        );
    }

    #[test]
    fn walk_is_preorder() {
        let p = page(vec![
            ent("A", 0, (0.0, 0.0, 400.0, 800.0)),
            ent("A1", 1, (10.0, 10.0, 100.0, 100.0)),
            ent("B", 2, (500.0, 0.0, 400.0, 800.0)),
            ent("A2", 3, (10.0, 300.0, 100.0, 100.0)),
        ]);
        let t = build_tree(&p, &page_contexts(&p)).unwrap();
        let ids: Vec<_> = t.nodes().iter().map(|n| n.entity_id.as_str()).collect();
        assert_eq!(ids, vec!["A", "A1", "A2", "B"]);
    }
}
