use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::model::{GraphicalEntity, Page};

/// Percentage band around a canvas edge or center that counts as aligned.
pub const ALIGNMENT_BAND_PCT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlignmentHint {
    LeftEdge,
    RightEdge,
    TopEdge,
    BottomEdge,
    HCenter,
    VCenter,
}

impl AlignmentHint {
    pub fn as_str(self) -> &'static str {
        match self {
            AlignmentHint::LeftEdge => "left-edge",
            AlignmentHint::RightEdge => "right-edge",
            AlignmentHint::TopEdge => "top-edge",
            AlignmentHint::BottomEdge => "bottom-edge",
            AlignmentHint::HCenter => "h-center",
            AlignmentHint::VCenter => "v-center",
        }
    }
}

/// Position and size of an entity as percentages of its page canvas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualContext {
    pub entity_id: String,
    pub left_pct: f64,
    pub top_pct: f64,
    pub width_pct: f64,
    pub height_pct: f64,
    pub area_pct: f64,
    pub alignment_hints: BTreeSet<AlignmentHint>,
}

pub fn compute_visual_context(entity: &GraphicalEntity, page: &Page) -> VisualContext {
    let (cw, ch) = (page.canvas_width, page.canvas_height);
    let b = entity.bbox;
    let left_pct = b.x / cw * 100.0;
    let top_pct = b.y / ch * 100.0;
    let width_pct = b.width / cw * 100.0;
    let height_pct = b.height / ch * 100.0;

    let near = |v: f64, target: f64| (v - target).abs() <= ALIGNMENT_BAND_PCT;
    let mut hints = BTreeSet::new();
    for (hit, hint) in [
        (near(left_pct, 0.0), AlignmentHint::LeftEdge),
        (near(left_pct + width_pct, 100.0), AlignmentHint::RightEdge),
        (near(top_pct, 0.0), AlignmentHint::TopEdge),
        (near(top_pct + height_pct, 100.0), AlignmentHint::BottomEdge),
        (near(left_pct + width_pct / 2.0, 50.0), AlignmentHint::HCenter),
        (near(top_pct + height_pct / 2.0, 50.0), AlignmentHint::VCenter),
    ] {
        if hit {
            hints.insert(hint);
        }
    }

    VisualContext {
        entity_id: entity.id.clone(),
        left_pct,
        top_pct,
        width_pct,
        height_pct,
        area_pct: width_pct * height_pct / 100.0,
        alignment_hints: hints,
    }
}

/// Visual contexts for every entity on the page, in entity order.
pub fn page_contexts(page: &Page) -> Vec<VisualContext> {
    page.entities.iter().map(|e| compute_visual_context(e, page)).collect()
}
