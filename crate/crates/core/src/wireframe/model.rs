use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Parsed wireframe set: one page per source SVG file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireframeDocument {
    pub source_path: String,
    pub pages: Vec<Page>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<IngestDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Page {
    pub id: String,
    pub canvas_width: f64,
    pub canvas_height: f64,
    pub entities: Vec<GraphicalEntity>,
}

impl Page {
    pub fn entity(&self, id: &str) -> Option<&GraphicalEntity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn diagonal(&self) -> f64 {
        self.canvas_width.hypot(self.canvas_height)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntityKind {
    Rect,
    RoundedRect,
    Ellipse,
    Line,
    Text,
    Image,
    Group,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Rect => "rect",
            EntityKind::RoundedRect => "rounded-rect",
            EntityKind::Ellipse => "ellipse",
            EntityKind::Line => "line",
            EntityKind::Text => "text",
            EntityKind::Image => "image",
            EntityKind::Group => "group",
        }
    }
}

/// Axis-aligned box in SVG user units, origin at the canvas top-left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BBox {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Self {
        BBox { x, y, width, height }
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// True when `other` lies inside `self` grown by `tolerance` on every side.
    pub fn contains_within(&self, other: &BBox, tolerance: f64) -> bool {
        other.x >= self.x - tolerance
            && other.y >= self.y - tolerance
            && other.right() <= self.right() + tolerance
            && other.bottom() <= self.bottom() + tolerance
    }

    pub fn union(&self, other: &BBox) -> BBox {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        BBox { x, y, width: self.right().max(other.right()) - x, height: self.bottom().max(other.bottom()) - y }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> BBox {
        BBox { x: self.x + dx, y: self.y + dy, ..*self }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StyleSummary {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fill: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stroke: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub font_size: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corner_radius: Option<f64>,
}

impl StyleSummary {
    pub fn is_empty(&self) -> bool {
        self.fill.is_none() && self.stroke.is_none() && self.font_size.is_none() && self.corner_radius.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphicalEntity {
    pub id: String,
    pub kind: EntityKind,
    pub bbox: BBox,
    #[serde(default, skip_serializing_if = "StyleSummary::is_empty")]
    pub style: StyleSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_content: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<Annotation>,
    pub doc_order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_parent: Option<String>,
}

impl GraphicalEntity {
    /// Component kind from the annotation, or a default implied by the shape.
    pub fn component_kind(&self) -> ComponentKind {
        if let Some(a) = &self.annotation {
            return a.component_kind.clone();
        }
        match self.kind {
            EntityKind::Text => ComponentKind::TextLabel,
            EntityKind::Image => ComponentKind::Image,
            EntityKind::Line => ComponentKind::Divider,
            _ => ComponentKind::Panel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventBinding {
    pub name: String,
    pub action: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub component_kind: ComponentKind,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub attributes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data_binding: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventBinding>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depends_on: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_ref: Option<String>,
}

impl Annotation {
    pub fn of_kind(component_kind: ComponentKind) -> Self {
        Annotation {
            component_kind,
            attributes: BTreeMap::new(),
            data_binding: None,
            events: Vec::new(),
            depends_on: Vec::new(),
            page_ref: None,
        }
    }
}

/// Controlled vocabulary of UI component kinds.
///
/// Tokens outside the vocabulary are kept verbatim in [`ComponentKind::Unknown`];
/// an annotation without any `@component` key carries `Unknown("unknown")`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComponentKind {
    Webmap,
    BarChart,
    PieChart,
    LineChart,
    Dropdown,
    Button,
    Slider,
    DateSelector,
    Table,
    Panel,
    Nav,
    ThumbnailLink,
    TextLabel,
    Image,
    Divider,
    /// Synthetic page root of a component tree.
    Page,
    Unknown(String),
}

pub const VOCABULARY: &[&str] = &[
    "webmap",
    "bar-chart",
    "pie-chart",
    "line-chart",
    "dropdown",
    "button",
    "slider",
    "date-selector",
    "table",
    "panel",
    "nav",
    "thumbnail-link",
    "text-label",
    "image",
    "divider",
    "page",
];

impl ComponentKind {
    pub const UNKNOWN: &'static str = "unknown";

    /// Parses a token after normalizing case and separators
    /// (`"Date Selector"` and `"date_selector"` both give `date-selector`).
    pub fn parse(token: &str) -> ComponentKind {
        let norm = normalize_token(token);
        match norm.as_str() {
            "webmap" => ComponentKind::Webmap,
            "bar-chart" => ComponentKind::BarChart,
            "pie-chart" => ComponentKind::PieChart,
            "line-chart" => ComponentKind::LineChart,
            "dropdown" => ComponentKind::Dropdown,
            "button" => ComponentKind::Button,
            "slider" => ComponentKind::Slider,
            "date-selector" => ComponentKind::DateSelector,
            "table" => ComponentKind::Table,
            "panel" => ComponentKind::Panel,
            "nav" => ComponentKind::Nav,
            "thumbnail-link" => ComponentKind::ThumbnailLink,
            "text-label" => ComponentKind::TextLabel,
            "image" => ComponentKind::Image,
            "divider" => ComponentKind::Divider,
            "page" => ComponentKind::Page,
            "" => ComponentKind::Unknown(Self::UNKNOWN.to_string()),
            _ => ComponentKind::Unknown(norm),
        }
    }

    pub fn as_str(&self) -> &str {
        match self {
            ComponentKind::Webmap => "webmap",
            ComponentKind::BarChart => "bar-chart",
            ComponentKind::PieChart => "pie-chart",
            ComponentKind::LineChart => "line-chart",
            ComponentKind::Dropdown => "dropdown",
            ComponentKind::Button => "button",
            ComponentKind::Slider => "slider",
            ComponentKind::DateSelector => "date-selector",
            ComponentKind::Table => "table",
            ComponentKind::Panel => "panel",
            ComponentKind::Nav => "nav",
            ComponentKind::ThumbnailLink => "thumbnail-link",
            ComponentKind::TextLabel => "text-label",
            ComponentKind::Image => "image",
            ComponentKind::Divider => "divider",
            ComponentKind::Page => "page",
            ComponentKind::Unknown(raw) => raw,
        }
    }

    pub fn is_known(&self) -> bool {
        !matches!(self, ComponentKind::Unknown(_))
    }

    /// Kinds that become their own view/viewmodel pair in the generated project.
    /// Layout-only kinds are composed inline by the page view.
    pub fn is_componentized(&self) -> bool {
        !matches!(self, ComponentKind::Panel | ComponentKind::TextLabel | ComponentKind::Divider | ComponentKind::Page)
    }
}

fn normalize_token(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    for word in token.trim().split(|c: char| c.is_whitespace() || c == '_' || c == '-').filter(|w| !w.is_empty()) {
        if !out.is_empty() {
            out.push('-');
        }
        out.push_str(&word.to_lowercase());
    }
    out
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ComponentKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ComponentKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(ComponentKind::parse(&s))
    }
}

/// Non-fatal finding recorded while reading a wireframe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestDiagnostic {
    pub code: String,
    pub message: String,
}

impl IngestDiagnostic {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        IngestDiagnostic { code: code.to_string(), message: message.into() }
    }
}

impl fmt::Display for IngestDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_round_trips() {
        for tok in VOCABULARY {
            let k = ComponentKind::parse(tok);
            assert!(k.is_known(), "{tok}");
            assert_eq!(k.as_str(), *tok);
        }
    }

    #[test]
    fn tokens_are_normalized() {
        assert_eq!(ComponentKind::parse("Date Selector"), ComponentKind::DateSelector);
        assert_eq!(ComponentKind::parse("LINE_chart"), ComponentKind::LineChart);
        assert_eq!(ComponentKind::parse("Layer Switcher"), ComponentKind::Unknown("layer-switcher".into()));
        assert_eq!(ComponentKind::parse("  ").as_str(), "unknown");
    }

    #[test]
    fn contains_within_tolerance() {
        let outer = BBox::new(0.0, 0.0, 100.0, 100.0);
        let inner = BBox::new(-2.0, 10.0, 50.0, 50.0);
        assert!(!outer.contains_within(&inner, 0.0));
        assert!(outer.contains_within(&inner, 2.0));
    }
}
