//! SVG 1.1 subset reader: rect, ellipse, line, text/tspan, image and g, with
//! annotations taken from `<desc>`/`<title>` children or `@`-prefixed text.

use std::collections::HashSet;
use std::path::Path;

use roxmltree::{Document, Node};

use super::annotation::parse_annotation;
use super::model::*;
use super::IngestError;

const DEFAULT_FONT_SIZE: f64 = 16.0;
/// Average glyph advance as a fraction of the font size.
const GLYPH_ADVANCE_EM: f64 = 0.6;
const LINE_HEIGHT_EM: f64 = 1.2;

/// Parses one SVG file into a single-page document.
pub fn parse_svg(bytes: &[u8], path: &str) -> Result<WireframeDocument, IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IngestError::UnsupportedFormat {
        path: path.to_string(),
        reason: format!("input is not UTF-8 ({e})"),
    })?;
    let doc = Document::parse(text).map_err(|e| {
        let pos = e.pos();
        IngestError::Xml { path: path.to_string(), line: pos.row, column: pos.col, message: e.to_string() }
    })?;
    let root = doc.root_element();
    if root.tag_name().name() != "svg" {
        return Err(IngestError::UnsupportedFormat {
            path: path.to_string(),
            reason: format!("root element is <{}>, expected <svg>", root.tag_name().name()),
        });
    }

    let canvas = read_canvas(root, path)?;
    let page_id = root.attribute("id").map(str::to_string).unwrap_or_else(|| page_id_from_path(path));

    let mut walker = Walker {
        path,
        canvas,
        entities: Vec::new(),
        diagnostics: Vec::new(),
        explicit_ids: explicit_ids(root),
        used_ids: HashSet::new(),
    };
    let inherited = Inherited { dx: -canvas.min_x, dy: -canvas.min_y, font_size: None };
    walker.walk_children(root, None, inherited)?;

    let page =
        Page { id: page_id, canvas_width: canvas.width, canvas_height: canvas.height, entities: walker.entities };
    check_dependencies(&page, path)?;
    Ok(WireframeDocument { source_path: path.to_string(), pages: vec![page], diagnostics: walker.diagnostics })
}

/// Reads and parses an SVG file from disk.
pub fn read_wireframe(path: &Path) -> Result<WireframeDocument, IngestError> {
    let display = path.display().to_string();
    let bytes = std::fs::read(path).map_err(|source| IngestError::Io { path: display.clone(), source })?;
    parse_svg(&bytes, &display)
}

impl WireframeDocument {
    /// Concatenates single-file documents in the given order.
    pub fn merge(docs: Vec<WireframeDocument>) -> Result<WireframeDocument, IngestError> {
        let mut seen = HashSet::new();
        let mut sources = Vec::new();
        let mut pages = Vec::new();
        let mut diagnostics = Vec::new();
        for d in docs {
            for p in &d.pages {
                if !seen.insert(p.id.clone()) {
                    return Err(IngestError::Validation {
                        path: d.source_path.clone(),
                        message: format!("duplicate page id `{}`", p.id),
                    });
                }
            }
            sources.push(d.source_path);
            pages.extend(d.pages);
            diagnostics.extend(d.diagnostics);
        }
        if pages.is_empty() {
            return Err(IngestError::Validation { path: String::new(), message: "no wireframe pages supplied".into() });
        }
        Ok(WireframeDocument { source_path: sources.join(";"), pages, diagnostics })
    }
}

fn page_id_from_path(path: &str) -> String {
    Path::new(path).file_stem().and_then(|s| s.to_str()).filter(|s| !s.is_empty()).unwrap_or("page").to_string()
}

#[derive(Debug, Clone, Copy)]
struct Canvas {
    min_x: f64,
    min_y: f64,
    width: f64,
    height: f64,
}

fn read_canvas(root: Node, path: &str) -> Result<Canvas, IngestError> {
    let invalid = |message: String| IngestError::Validation { path: path.to_string(), message };
    let canvas = if let Some(vb) = root.attribute("viewBox") {
        let nums: Vec<f64> = vb
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| invalid(format!("unparsable viewBox `{vb}`")))?;
        if nums.len() != 4 {
            return Err(invalid(format!("viewBox needs 4 numbers, got `{vb}`")));
        }
        Canvas { min_x: nums[0], min_y: nums[1], width: nums[2], height: nums[3] }
    } else {
        let dim = |name: &str| -> Result<f64, IngestError> {
            let raw =
                root.attribute(name).ok_or_else(|| invalid(format!("svg root has neither viewBox nor {name}")))?;
            match parse_length(raw) {
                Some(Length::Abs(v)) => Ok(v),
                _ => Err(invalid(format!("canvas {name} `{raw}` is not an absolute length"))),
            }
        };
        Canvas { min_x: 0.0, min_y: 0.0, width: dim("width")?, height: dim("height")? }
    };
    if !(canvas.width > 0.0 && canvas.height > 0.0) || !canvas.width.is_finite() || !canvas.height.is_finite() {
        return Err(invalid(format!("canvas must have positive area, got {}x{}", canvas.width, canvas.height)));
    }
    Ok(canvas)
}

enum Length {
    Abs(f64),
    Percent(f64),
}

fn parse_length(raw: &str) -> Option<Length> {
    let s = raw.trim();
    if let Some(p) = s.strip_suffix('%') {
        return p.trim().parse().ok().map(Length::Percent);
    }
    let num_end = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '-'
                || c == '+'
                || ((c == 'e' || c == 'E')
                    && s[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let v: f64 = s[..num_end].parse().ok()?;
    v.is_finite().then_some(Length::Abs(v))
}

fn explicit_ids(root: Node) -> HashSet<String> {
    root.descendants().filter(|n| n.is_element()).filter_map(|n| n.attribute("id")).map(str::to_string).collect()
}

#[derive(Clone, Copy)]
struct Inherited {
    dx: f64,
    dy: f64,
    font_size: Option<f64>,
}

struct Walker<'p> {
    path: &'p str,
    canvas: Canvas,
    entities: Vec<GraphicalEntity>,
    diagnostics: Vec<IngestDiagnostic>,
    explicit_ids: HashSet<String>,
    used_ids: HashSet<String>,
}

impl Walker<'_> {
    /// Walks the element children of `parent`; returns the indices of the
    /// entities created directly under it.
    fn walk_children(&mut self, parent: Node, group: Option<&str>, inh: Inherited) -> Result<Vec<usize>, IngestError> {
        let mut direct = Vec::new();
        for child in parent.children().filter(|n| n.is_element()) {
            let name = child.tag_name().name();
            if matches!(name, "title" | "desc") {
                continue;
            }
            if !is_svg_ns(child) || !matches!(name, "rect" | "ellipse" | "line" | "text" | "image" | "g") {
                self.diagnostics.push(IngestDiagnostic::new(
                    "unsupported-element",
                    format!("skipped <{}>{}", name, id_suffix(child)),
                ));
                continue;
            }
            if let Some(idx) = self.entity(child, group, inh)? {
                direct.push(idx);
            }
        }
        if group.is_none() {
            for &i in &direct {
                if is_annotation_text(&self.entities[i]) {
                    self.diagnostics.push(IngestDiagnostic::new(
                        "orphan-annotation",
                        format!("annotation text `{}` is not grouped with a shape", self.entities[i].id),
                    ));
                }
            }
        }
        Ok(direct)
    }

    fn entity(&mut self, node: Node, group: Option<&str>, inh: Inherited) -> Result<Option<usize>, IngestError> {
        let (tx, ty) = self.translation(node);
        let inh = Inherited { dx: inh.dx + tx, dy: inh.dy + ty, font_size: self.font_size(node).or(inh.font_size) };
        let name = node.tag_name().name();
        let doc_order = self.entities.len();
        let id = self.assign_id(node, name, doc_order)?;
        let mut style = self.style(node);

        let (kind, bbox, text_content) = match name {
            "rect" => {
                let rx = self.num(node, "rx", Axis::X).or_else(|| self.num(node, "ry", Axis::Y));
                let bbox = BBox::new(
                    self.num(node, "x", Axis::X).unwrap_or(0.0),
                    self.num(node, "y", Axis::Y).unwrap_or(0.0),
                    self.num(node, "width", Axis::X).unwrap_or(0.0),
                    self.num(node, "height", Axis::Y).unwrap_or(0.0),
                );
                match rx {
                    Some(r) if r > 0.0 => {
                        style.corner_radius = Some(r);
                        (EntityKind::RoundedRect, bbox, None)
                    }
                    _ => (EntityKind::Rect, bbox, None),
                }
            }
            "image" => (
                EntityKind::Image,
                BBox::new(
                    self.num(node, "x", Axis::X).unwrap_or(0.0),
                    self.num(node, "y", Axis::Y).unwrap_or(0.0),
                    self.num(node, "width", Axis::X).unwrap_or(0.0),
                    self.num(node, "height", Axis::Y).unwrap_or(0.0),
                ),
                None,
            ),
            "ellipse" => {
                let cx = self.num(node, "cx", Axis::X).unwrap_or(0.0);
                let cy = self.num(node, "cy", Axis::Y).unwrap_or(0.0);
                let rx = self.num(node, "rx", Axis::X).unwrap_or(0.0);
                let ry = self.num(node, "ry", Axis::Y).unwrap_or(0.0);
                (EntityKind::Ellipse, BBox::new(cx - rx, cy - ry, 2.0 * rx, 2.0 * ry), None)
            }
            "line" => {
                let x1 = self.num(node, "x1", Axis::X).unwrap_or(0.0);
                let y1 = self.num(node, "y1", Axis::Y).unwrap_or(0.0);
                let x2 = self.num(node, "x2", Axis::X).unwrap_or(0.0);
                let y2 = self.num(node, "y2", Axis::Y).unwrap_or(0.0);
                (EntityKind::Line, BBox::new(x1.min(x2), y1.min(y2), (x2 - x1).abs(), (y2 - y1).abs()), None)
            }
            "text" => {
                let fs = inh.font_size.unwrap_or(DEFAULT_FONT_SIZE);
                style.font_size = Some(fs);
                let (bbox, content) = self.text_box(node, fs);
                (EntityKind::Text, bbox, Some(content))
            }
            "g" => (EntityKind::Group, BBox::new(0.0, 0.0, 0.0, 0.0), None),
            _ => unreachable!("filtered by caller"),
        };

        if bbox.width < 0.0 || bbox.height < 0.0 {
            return Err(IngestError::Validation {
                path: self.path.to_string(),
                message: format!("<{name} id=\"{id}\"> has negative size"),
            });
        }

        let annotation = match annotation_text(node) {
            Some(raw) => Some(parse_annotation(&raw).map_err(|source| IngestError::Annotation {
                path: self.path.to_string(),
                entity: id.clone(),
                source,
            })?),
            None => None,
        };

        let idx = self.entities.len();
        self.entities.push(GraphicalEntity {
            id: id.clone(),
            kind,
            bbox: bbox.translated(inh.dx, inh.dy),
            style,
            text_content,
            annotation,
            doc_order,
            group_parent: group.map(str::to_string),
        });

        if kind == EntityKind::Group {
            let children = self.walk_children(node, Some(&id), inh)?;
            self.entities[idx].bbox = self.group_bounds(&children, inh);
            self.attach_text_annotations(&children, idx)?;
        }
        Ok(Some(idx))
    }

    fn group_bounds(&self, children: &[usize], inh: Inherited) -> BBox {
        let mut iter = children.iter().map(|&c| self.entities[c].bbox);
        match iter.next() {
            Some(first) => iter.fold(first, |acc, b| acc.union(&b)),
            None => BBox::new(inh.dx, inh.dy, 0.0, 0.0),
        }
    }

    /// Attaches `@`-prefixed text children of a group to the first
    /// unannotated shape among them, else to the group itself.
    fn attach_text_annotations(&mut self, siblings: &[usize], group: usize) -> Result<(), IngestError> {
        let notes: Vec<usize> = siblings
            .iter()
            .copied()
            .filter(|&i| is_annotation_text(&self.entities[i]) && self.entities[i].annotation.is_none())
            .collect();
        for note in notes {
            let target = siblings
                .iter()
                .copied()
                .find(|&i| !is_annotation_text(&self.entities[i]) && self.entities[i].annotation.is_none())
                .or(Some(group).filter(|&g| self.entities[g].annotation.is_none()));
            let Some(target) = target else {
                self.diagnostics.push(IngestDiagnostic::new(
                    "annotation-conflict",
                    format!("annotation text `{}` ignored: its shapes are already annotated", self.entities[note].id),
                ));
                continue;
            };
            let raw = self.entities[note].text_content.clone().unwrap_or_default();
            let ann = parse_annotation(&raw).map_err(|source| IngestError::Annotation {
                path: self.path.to_string(),
                entity: self.entities[target].id.clone(),
                source,
            })?;
            self.entities[target].annotation = Some(ann);
        }
        Ok(())
    }

    fn text_box(&self, node: Node, fs: f64) -> (BBox, String) {
        let mut lines: Vec<String> = Vec::new();
        let mut x = self.num(node, "x", Axis::X);
        let mut y = self.num(node, "y", Axis::Y);
        for child in node.children() {
            if child.is_text() {
                let t = child.text().unwrap_or("").trim();
                if !t.is_empty() {
                    lines.push(t.to_string());
                }
            } else if child.is_element() && child.tag_name().name() == "tspan" {
                if x.is_none() {
                    x = self.num(child, "x", Axis::X);
                }
                if y.is_none() {
                    y = self.num(child, "y", Axis::Y);
                }
                let t: String = child.descendants().filter(|d| d.is_text()).filter_map(|d| d.text()).collect();
                let t = t.trim();
                if !t.is_empty() {
                    lines.push(t.to_string());
                }
            }
        }
        let longest = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0) as f64;
        let width = longest * fs * GLYPH_ADVANCE_EM;
        let height = if lines.is_empty() { 0.0 } else { fs + (lines.len() - 1) as f64 * fs * LINE_HEIGHT_EM };
        let mut left = x.unwrap_or(0.0);
        match node.attribute("text-anchor").or_else(|| style_prop(node, "text-anchor")) {
            Some("middle") => left -= width / 2.0,
            Some("end") => left -= width,
            _ => {}
        }
        (BBox::new(left, y.unwrap_or(0.0) - fs, width, height), lines.join("\n"))
    }

    fn num(&self, node: Node, attr: &str, axis: Axis) -> Option<f64> {
        match parse_length(node.attribute(attr)?)? {
            Length::Abs(v) => Some(v),
            Length::Percent(p) => Some(
                p / 100.0
                    * match axis {
                        Axis::X => self.canvas.width,
                        Axis::Y => self.canvas.height,
                    },
            ),
        }
    }

    fn font_size(&self, node: Node) -> Option<f64> {
        let raw = style_prop(node, "font-size").or_else(|| node.attribute("font-size"))?;
        match parse_length(raw)? {
            Length::Abs(v) if v >= 0.0 => Some(v),
            _ => None,
        }
    }

    fn style(&self, node: Node) -> StyleSummary {
        let prop = |name: &str| {
            style_prop(node, name)
                .or_else(|| node.attribute(name))
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
        };
        StyleSummary { fill: prop("fill"), stroke: prop("stroke"), font_size: None, corner_radius: None }
    }

    fn translation(&mut self, node: Node) -> (f64, f64) {
        let Some(raw) = node.attribute("transform") else {
            return (0.0, 0.0);
        };
        match parse_translate(raw) {
            Some(t) => t,
            None => {
                self.diagnostics.push(IngestDiagnostic::new(
                    "unsupported-transform",
                    format!("ignored transform `{raw}` on <{}>{}", node.tag_name().name(), id_suffix(node)),
                ));
                (0.0, 0.0)
            }
        }
    }

    fn assign_id(&mut self, node: Node, name: &str, doc_order: usize) -> Result<String, IngestError> {
        if let Some(id) = node.attribute("id") {
            if !self.used_ids.insert(id.to_string()) {
                return Err(IngestError::Validation {
                    path: self.path.to_string(),
                    message: format!("duplicate entity id `{id}`"),
                });
            }
            return Ok(id.to_string());
        }
        let kind = if name == "g" { "group" } else { name };
        let base = format!("{kind}-{doc_order}");
        let mut id = base.clone();
        let mut n = 1;
        while self.explicit_ids.contains(&id) || self.used_ids.contains(&id) {
            id = format!("{base}-{n}");
            n += 1;
        }
        self.used_ids.insert(id.clone());
        Ok(id)
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

fn is_svg_ns(node: Node) -> bool {
    matches!(node.tag_name().namespace(), None | Some("http://www.w3.org/2000/svg"))
}

fn id_suffix(node: Node) -> String {
    node.attribute("id").map(|id| format!(" id=\"{id}\"")).unwrap_or_default()
}

fn is_annotation_text(e: &GraphicalEntity) -> bool {
    e.kind == EntityKind::Text && e.text_content.as_deref().is_some_and(|t| t.trim_start().starts_with('@'))
}

/// `<desc>` wins over `<title>`; empty elements are ignored.
fn annotation_text(node: Node) -> Option<String> {
    let pick = |tag: &str| {
        node.children()
            .find(|c| c.is_element() && c.tag_name().name() == tag)
            .map(|c| c.descendants().filter(|d| d.is_text()).filter_map(|d| d.text()).collect::<String>())
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
    };
    pick("desc").or_else(|| pick("title"))
}

fn style_prop<'a>(node: Node<'a, 'a>, name: &str) -> Option<&'a str> {
    node.attribute("style")?.split(';').find_map(|decl| {
        let (k, v) = decl.split_once(':')?;
        (k.trim() == name).then(|| v.trim())
    })
}

/// Accepts `translate(...)` lists and pure-translation `matrix(1 0 0 1 tx ty)`.
fn parse_translate(raw: &str) -> Option<(f64, f64)> {
    let mut rest = raw.trim();
    let (mut dx, mut dy) = (0.0, 0.0);
    while !rest.is_empty() {
        let open = rest.find('(')?;
        let close = rest.find(')')?;
        let func = rest[..open].trim().trim_start_matches(',').trim();
        let args: Vec<f64> = rest[open + 1..close]
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().ok())
            .collect::<Option<_>>()?;
        match (func, args.as_slice()) {
            ("translate", [tx]) => dx += tx,
            ("translate", [tx, ty]) => {
                dx += tx;
                dy += ty;
            }
            ("matrix", [a, b, c, d, e, f]) if *a == 1.0 && *b == 0.0 && *c == 0.0 && *d == 1.0 => {
                dx += e;
                dy += f;
            }
            _ => return None,
        }
        rest = rest[close + 1..].trim_start_matches(|c: char| c.is_whitespace() || c == ',');
    }
    Some((dx, dy))
}

fn check_dependencies(page: &Page, path: &str) -> Result<(), IngestError> {
    let ids: HashSet<&str> = page.entities.iter().map(|e| e.id.as_str()).collect();
    for e in &page.entities {
        let Some(a) = &e.annotation else { continue };
        if let Some(missing) = a.depends_on.iter().find(|d| !ids.contains(d.as_str())) {
            return Err(IngestError::Validation {
                path: path.to_string(),
                message: format!("entity `{}` depends on `{missing}`, which is not on page `{}`", e.id, page.id),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> WireframeDocument {
        parse_svg(s.as_bytes(), "mem/test.svg").unwrap()
    }

    #[test]
    fn single_rect() {
        let d = parse(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="1000" height="800"><rect x="100" y="100" width="400" height="300"/></svg>"#,
        );
        assert_eq!(d.pages.len(), 1);
        let p = &d.pages[0];
        assert_eq!(p.id, "test");
        assert_eq!((p.canvas_width, p.canvas_height), (1000.0, 800.0));
        assert_eq!(p.entities.len(), 1);
        assert_eq!(p.entities[0].kind, EntityKind::Rect);
        assert_eq!(p.entities[0].bbox, BBox::new(100.0, 100.0, 400.0, 300.0));
    }

    #[test]
    fn empty_svg() {
        let d = parse(r#"<svg width="10" height="10"/>"#);
        assert_eq!(d.pages.len(), 1);
        assert!(d.pages[0].entities.is_empty());
    }

    #[test]
    fn viewbox_wins_over_width_height() {
        let d = parse(
            r#"<svg width="50" height="50" viewBox="10 20 200 100"><rect x="10" y="20" width="5" height="5"/></svg>"#,
        );
        let p = &d.pages[0];
        assert_eq!((p.canvas_width, p.canvas_height), (200.0, 100.0));
        assert_eq!(p.entities[0].bbox, BBox::new(0.0, 0.0, 5.0, 5.0));
    }

    #[test]
    fn malformed_xml_reports_position() {
        let err = parse_svg(b"<svg width=\"10\" height=\"10\">\n  <rect></svg>", "bad.svg").unwrap_err();
        match err {
            IngestError::Xml { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_svg_root_is_unsupported() {
        let err = parse_svg(b"<html/>", "x.svg").unwrap_err();
        assert!(matches!(err, IngestError::UnsupportedFormat { .. }));
    }

    #[test]
    fn zero_area_canvas_is_rejected() {
        for s in [r#"<svg width="0" height="10"/>"#, r#"<svg viewBox="0 0 100 0"/>"#, r#"<svg/>"#] {
            assert!(matches!(parse_svg(s.as_bytes(), "x.svg"), Err(IngestError::Validation { .. })), "{s}");
        }
    }

    #[test]
    fn shapes_groups_and_translate() {
        let d = parse(
            r##"<svg viewBox="0 0 100 100">
              <g id="card" transform="translate(10, 20)">
                <rect id="bg" x="0" y="0" width="30" height="20" rx="3" fill="#eee" style="stroke: #333"/>
                <ellipse cx="10" cy="10" rx="5" ry="4"/>
                <line x1="20" y1="15" x2="2" y2="5"/>
              </g>
              <image x="50" y="50" width="10" height="10"/>
              <path d="M0 0L1 1"/>
              <circle r="4"/>
            </svg>"##,
        );
        let es = &d.pages[0].entities;
        let kinds: Vec<_> = es.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            vec![EntityKind::Group, EntityKind::RoundedRect, EntityKind::Ellipse, EntityKind::Line, EntityKind::Image]
        );
        assert_eq!(es[1].bbox, BBox::new(10.0, 20.0, 30.0, 20.0));
        assert_eq!(es[1].style.corner_radius, Some(3.0));
        assert_eq!(es[1].style.fill.as_deref(), Some("#eee"));
        assert_eq!(es[1].style.stroke.as_deref(), Some("#333"));
        assert_eq!(es[2].bbox, BBox::new(15.0, 26.0, 10.0, 8.0));
        assert_eq!(es[3].bbox, BBox::new(12.0, 25.0, 18.0, 10.0));
        assert_eq!(es[0].bbox, BBox::new(10.0, 20.0, 30.0, 20.0));
        assert!(es[1..4].iter().all(|e| e.group_parent.as_deref() == Some("card")));
        assert_eq!(es[4].group_parent, None);
        assert_eq!(es.iter().map(|e| e.doc_order).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
        assert_eq!(d.diagnostics.len(), 2);
        assert!(d.diagnostics.iter().all(|x| x.code == "unsupported-element"));
        assert_eq!(es[2].id, "ellipse-2");
    }

    #[test]
    fn rotate_transform_is_diagnosed_and_ignored() {
        let d = parse(r#"<svg viewBox="0 0 100 100"><g transform="rotate(45)"><rect width="5" height="5"/></g></svg>"#);
        assert!(d.diagnostics.iter().any(|x| x.code == "unsupported-transform"));
        assert_eq!(d.pages[0].entities[1].bbox, BBox::new(0.0, 0.0, 5.0, 5.0));
    }

    #[test]
    fn matrix_translation_is_accepted() {
        assert_eq!(parse_translate("matrix(1 0 0 1 5 -2)"), Some((5.0, -2.0)));
        assert_eq!(parse_translate("translate(3) translate(1,2)"), Some((4.0, 2.0)));
        assert_eq!(parse_translate("scale(2)"), None);
    }

    #[test]
    fn text_content_and_box() {
        let d = parse(
            r#"<svg viewBox="0 0 1000 800"><g font-size="20"><text x="100" y="50"><tspan>Hello</tspan><tspan>there you</tspan></text></g></svg>"#,
        );
        let t = &d.pages[0].entities[1];
        assert_eq!(t.text_content.as_deref(), Some("Hello\nthere you"));
        assert_eq!(t.style.font_size, Some(20.0));
        let b = t.bbox;
        assert!((b.x - 100.0).abs() < 1e-12 && (b.y - 30.0).abs() < 1e-12);
        assert!((b.width - 9.0 * 20.0 * 0.6).abs() < 1e-9);
        assert!((b.height - (20.0 + 24.0)).abs() < 1e-9);
    }

    #[test]
    fn desc_annotation_preferred_over_title() {
        let d = parse(
            r#"<svg viewBox="0 0 100 100"><rect id="m" width="10" height="10"><title>@component: button</title><desc>@component: webmap</desc></rect></svg>"#,
        );
        let a = d.pages[0].entities[0].annotation.as_ref().unwrap();
        assert_eq!(a.component_kind, ComponentKind::Webmap);
    }

    #[test]
    fn at_text_annotates_grouped_shape() {
        let d = parse(
            r#"<svg viewBox="0 0 100 100"><g id="grp"><rect id="box" width="50" height="50"/><text x="2" y="10">@component: slider</text></g></svg>"#,
        );
        let es = &d.pages[0].entities;
        assert_eq!(es.len(), 3);
        let b = es.iter().find(|e| e.id == "box").unwrap();
        assert_eq!(b.annotation.as_ref().unwrap().component_kind, ComponentKind::Slider);
        assert!(es.iter().find(|e| e.id == "grp").unwrap().annotation.is_none());
    }

    #[test]
    fn ungrouped_at_text_is_orphan() {
        let d = parse(r#"<svg viewBox="0 0 100 100"><text x="2" y="10">@component: slider</text></svg>"#);
        assert!(d.diagnostics.iter().any(|x| x.code == "orphan-annotation"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = parse_svg(br#"<svg viewBox="0 0 9 9"><rect id="a"/><rect id="a"/></svg>"#, "x.svg");
        assert!(matches!(r, Err(IngestError::Validation { .. })));
    }

    #[test]
    fn generated_ids_avoid_explicit_ones() {
        let d = parse(r#"<svg viewBox="0 0 9 9"><rect/><rect id="rect-0"/></svg>"#);
        let ids: Vec<_> = d.pages[0].entities.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, vec!["rect-0-1", "rect-0"]);
    }

    #[test]
    fn unresolved_dependency_is_rejected() {
        let r = parse_svg(br#"<svg viewBox="0 0 9 9"><rect id="a"><desc>@depends: b</desc></rect></svg>"#, "x.svg");
        assert!(matches!(r, Err(IngestError::Validation { .. })));
    }

    #[test]
    fn bad_annotation_names_entity() {
        let r = parse_svg(
            br#"<svg viewBox="0 0 9 9"><rect id="a"><desc>@data: x
@data: y</desc></rect></svg>"#,
            "x.svg",
        );
        match r {
            Err(IngestError::Annotation { entity, .. }) => assert_eq!(entity, "a"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn merge_rejects_duplicate_pages() {
        let a = parse(r#"<svg id="p" viewBox="0 0 9 9"/>"#);
        let b = parse(r#"<svg id="p" viewBox="0 0 9 9"/>"#);
        assert!(WireframeDocument::merge(vec![a.clone()]).is_ok());
        assert!(WireframeDocument::merge(vec![a, b]).is_err());
    }
}
