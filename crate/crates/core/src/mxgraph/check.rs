//! Layered checks over a parsed XML tree, plus lowering into the typed model.
//!
//! The same checks back both `parse_document` (first error wins) and the
//! verifier (all findings are reported).

use std::collections::{HashMap, HashSet};

use crate::diagnostics::{Finding, FindingCode, Severity};
use crate::xml::Element;

use super::{Cell, CellKind, Envelope, Geometry, GraphDocument, GraphModel, HostMeta, Point, StyleMap};
use super::{LAYER_ID, ROOT_ID};

const CELL_KNOWN: &[&str] = &["id", "value", "style", "vertex", "edge", "parent", "source", "target"];

pub(crate) struct RawCell<'a> {
    pub el: &'a Element,
    pub path: String,
    pub id: String,
    pub kind: CellKind,
    pub geometry: Option<&'a Element>,
}

pub(crate) struct DocShape<'a> {
    pub envelope: Envelope,
    pub mxfile: Option<&'a Element>,
    pub diagram: Option<&'a Element>,
    pub model: &'a Element,
    pub cells: Vec<RawCell<'a>>,
}

pub(crate) struct CheckReport<'a> {
    pub schema: Vec<Finding>,
    /// `None` when skipped because an earlier layer failed.
    pub references: Option<Vec<Finding>>,
    pub geometry: Option<Vec<Finding>>,
    pub shape: Option<DocShape<'a>>,
}

impl CheckReport<'_> {
    pub fn first_error(&self) -> Option<&Finding> {
        let layers = [Some(&self.schema), self.references.as_ref(), self.geometry.as_ref()];
        layers.into_iter().flatten().flat_map(|fs| fs.iter()).find(|f| f.severity == Severity::Error)
    }
}

fn has_error(findings: &[Finding]) -> bool {
    findings.iter().any(|f| f.severity == Severity::Error)
}

pub(crate) fn check_tree(tree: &Element) -> CheckReport<'_> {
    let mut schema = Vec::new();
    let shape = check_schema(tree, &mut schema);
    if has_error(&schema) {
        return CheckReport { schema, references: None, geometry: None, shape: None };
    }
    let shape = shape.expect("schema without errors yields a shape");
    let references = check_references(&shape);
    if has_error(&references) {
        return CheckReport { schema, references: Some(references), geometry: None, shape: Some(shape) };
    }
    let geometry = check_geometry(&shape);
    CheckReport { schema, references: Some(references), geometry: Some(geometry), shape: Some(shape) }
}

// ---------------------------------------------------------------------------
// schema

fn check_schema<'a>(tree: &'a Element, out: &mut Vec<Finding>) -> Option<DocShape<'a>> {
    let (envelope, mxfile, diagram, model, model_path) = match tree.name.as_str() {
        "mxfile" => {
            let diagrams: Vec<&Element> = tree.children_named("diagram").collect();
            warn_ignored(tree, "/mxfile", &["diagram"], out);
            match diagrams.len() {
                0 => {
                    out.push(Finding::new(FindingCode::UnexpectedElement, "/mxfile", "<mxfile> contains no <diagram> element"));
                    return None;
                }
                1 => {}
                n => {
                    out.push(Finding::new(
                        FindingCode::MultiPage,
                        "/mxfile",
                        format!("<mxfile> contains {n} <diagram> pages; exactly one is supported"),
                    ));
                    return None;
                }
            }
            let diagram = diagrams[0];
            let models: Vec<&Element> = diagram.children_named("mxGraphModel").collect();
            warn_ignored(diagram, "/mxfile/diagram", &["mxGraphModel"], out);
            if models.len() != 1 {
                let msg = if models.is_empty() && !diagram.text.is_empty() {
                    "<diagram> holds a compressed payload; only uncompressed <mxGraphModel> content is supported".to_string()
                } else {
                    format!("<diagram> must contain exactly one <mxGraphModel>, found {}", models.len())
                };
                out.push(Finding::new(FindingCode::UnexpectedElement, "/mxfile/diagram", msg));
                return None;
            }
            (Envelope::MxFile, Some(tree), Some(diagram), models[0], "/mxfile/diagram/mxGraphModel".to_string())
        }
        "mxGraphModel" => (Envelope::Bare, None, None, tree, "/mxGraphModel".to_string()),
        other => {
            out.push(Finding::new(
                FindingCode::UnsupportedRoot,
                format!("/{other}"),
                format!("root element <{other}> is neither <mxfile> nor <mxGraphModel>"),
            ));
            return None;
        }
    };

    let roots: Vec<&Element> = model.children_named("root").collect();
    warn_ignored(model, &model_path, &["root"], out);
    if roots.len() != 1 {
        out.push(Finding::new(
            FindingCode::UnexpectedElement,
            model_path.clone(),
            format!("<mxGraphModel> must contain exactly one <root>, found {}", roots.len()),
        ));
        return None;
    }
    let root = roots[0];
    let root_path = format!("{model_path}/root");

    let mut cells = Vec::new();
    for (pos, child) in root.children.iter().enumerate() {
        let positional = format!("{root_path}/{}[{}]", child.name, pos + 1);
        if child.name != "mxCell" {
            out.push(Finding::new(
                FindingCode::UnexpectedElement,
                positional,
                format!("<{}> is not supported under <root>; only <mxCell> is", child.name),
            ));
            continue;
        }
        let id = child.attr("id").unwrap_or("").to_string();
        let path = if id.is_empty() { positional } else { format!("{root_path}/mxCell[@id='{id}']") };
        if id.is_empty() {
            out.push(Finding::new(FindingCode::MissingId, path.clone(), "mxCell has no id attribute"));
        }
        let is_vertex = child.attr("vertex") == Some("1");
        let is_edge = child.attr("edge") == Some("1");
        let style_text = child.attr("style").unwrap_or("");
        let (style, lints) = StyleMap::parse(style_text);
        for lint in lints {
            out.push(Finding::new(
                FindingCode::DuplicateStyleKey,
                path.clone(),
                format!("style key '{}' appears more than once; keeping '{}', dropping '{}'", lint.key, lint.kept, lint.dropped),
            ));
        }
        let kind = match (is_vertex, is_edge) {
            (true, true) => {
                out.push(Finding::new(FindingCode::ConflictingKind, path.clone(), format!("cell '{id}' is marked both vertex and edge")));
                CellKind::Vertex
            }
            (true, false) if style.is_group_frame() => CellKind::Group,
            (true, false) => CellKind::Vertex,
            (false, true) => CellKind::Edge,
            (false, false) => CellKind::Structural,
        };

        let mut geometry = None;
        for (gpos, gchild) in child.children.iter().enumerate() {
            let gpath = format!("{path}/{}[{}]", gchild.name, gpos + 1);
            let is_geometry = gchild.name == "mxGeometry" && gchild.attr("as").is_none_or(|a| a == "geometry");
            if !is_geometry {
                out.push(Finding::new(
                    FindingCode::IgnoredElement,
                    gpath,
                    format!("<{}> inside mxCell is outside the supported subset and is ignored", gchild.name),
                ));
                continue;
            }
            if geometry.is_some() {
                out.push(Finding::new(FindingCode::UnexpectedElement, gpath, format!("cell '{id}' has more than one <mxGeometry>")));
                continue;
            }
            check_geometry_children(gchild, &format!("{path}/mxGeometry"), out);
            geometry = Some(gchild);
        }
        cells.push(RawCell { el: child, path, id, kind, geometry });
    }
    Some(DocShape { envelope, mxfile, diagram, model, cells })
}

fn check_geometry_children(geo: &Element, path: &str, out: &mut Vec<Finding>) {
    for (pos, child) in geo.children.iter().enumerate() {
        let ok = match child.name.as_str() {
            "Array" => child.attr("as") == Some("points"),
            "mxPoint" => matches!(child.attr("as"), Some("sourcePoint" | "targetPoint" | "offset")),
            _ => false,
        };
        if !ok {
            out.push(Finding::new(
                FindingCode::IgnoredElement,
                format!("{path}/{}[{}]", child.name, pos + 1),
                format!("<{}> inside mxGeometry is outside the supported subset and is ignored", child.name),
            ));
        } else if child.name == "Array" {
            for (ppos, p) in child.children.iter().enumerate() {
                if p.name != "mxPoint" {
                    out.push(Finding::new(
                        FindingCode::IgnoredElement,
                        format!("{path}/Array/{}[{}]", p.name, ppos + 1),
                        format!("<{}> inside a points array is ignored", p.name),
                    ));
                }
            }
        }
    }
}

fn warn_ignored(parent: &Element, path: &str, allowed: &[&str], out: &mut Vec<Finding>) {
    for (pos, child) in parent.children.iter().enumerate() {
        if !allowed.contains(&child.name.as_str()) {
            out.push(Finding::new(
                FindingCode::IgnoredElement,
                format!("{path}/{}[{}]", child.name, pos + 1),
                format!("<{}> is outside the supported subset and is ignored", child.name),
            ));
        }
    }
}

// ---------------------------------------------------------------------------
// references

fn check_references(shape: &DocShape<'_>) -> Vec<Finding> {
    let mut out = Vec::new();
    let cells = &shape.cells;

    let root_ok = cells.len() >= 2
        && cells[0].id == ROOT_ID
        && cells[0].kind == CellKind::Structural
        && cells[0].el.attr("parent").is_none()
        && cells[1].id == LAYER_ID
        && cells[1].kind == CellKind::Structural
        && cells[1].el.attr("parent") == Some(ROOT_ID);
    if !root_ok {
        let location = cells.first().map(|c| c.path.clone()).unwrap_or_else(|| "root".into());
        out.push(Finding::new(
            FindingCode::MissingRootCells,
            location,
            "the first two cells must be <mxCell id=\"0\"/> and <mxCell id=\"1\" parent=\"0\"/>",
        ));
    }

    let mut kinds: HashMap<&str, CellKind> = HashMap::new();
    for cell in cells {
        kinds.entry(cell.id.as_str()).or_insert(cell.kind);
    }

    let mut seen: HashSet<&str> = HashSet::new();
    for (idx, cell) in cells.iter().enumerate() {
        if !seen.insert(cell.id.as_str()) {
            out.push(Finding::new(FindingCode::DuplicateId, cell.path.clone(), format!("id '{}' is used by more than one cell", cell.id)));
        }
        let parent = cell.el.attr("parent");
        let is_top_root = idx == 0 && cell.id == ROOT_ID;
        if !is_top_root {
            match parent {
                None => out.push(Finding::new(
                    FindingCode::OrphanParent,
                    cell.path.clone(),
                    format!("cell '{}' has no parent attribute", cell.id),
                )),
                Some(p) => {
                    let declared_before = cells[..idx].iter().any(|c| c.id == p);
                    if !declared_before {
                        let detail = if kinds.contains_key(p) && p != cell.id {
                            format!("cell '{}' names parent '{p}', which is declared later in the document", cell.id)
                        } else {
                            format!("cell '{}' names parent '{p}', which does not exist", cell.id)
                        };
                        out.push(Finding::new(FindingCode::OrphanParent, cell.path.clone(), detail));
                    }
                }
            }
        }

        if cell.kind == CellKind::Edge {
            let mut anchored = false;
            for (role, attr) in [("source", "source"), ("target", "target")] {
                if let Some(end) = cell.el.attr(attr) {
                    anchored = true;
                    match kinds.get(end) {
                        Some(kind) if kind.is_vertex_like() => {}
                        Some(kind) => out.push(Finding::new(
                            FindingCode::DanglingEdge,
                            cell.path.clone(),
                            format!("edge '{}' has {role} '{end}', which is a {kind:?} cell, not a vertex", cell.id),
                        )),
                        None => out.push(Finding::new(
                            FindingCode::DanglingEdge,
                            cell.path.clone(),
                            format!("edge '{}' has {role} '{end}', which does not exist", cell.id),
                        )),
                    }
                }
            }
            if let Some(geo) = cell.geometry {
                anchored |= geo.children.iter().any(|c| {
                    (c.name == "mxPoint" && matches!(c.attr("as"), Some("sourcePoint" | "targetPoint")))
                        || (c.name == "Array" && !c.children.is_empty())
                });
            }
            if !anchored {
                out.push(Finding::new(
                    FindingCode::UnanchoredEdge,
                    cell.path.clone(),
                    format!("edge '{}' has no source, target or endpoint coordinates", cell.id),
                ));
            }
            if let (Some(s), Some(t)) = (cell.el.attr("source"), cell.el.attr("target")) {
                if s == t {
                    out.push(Finding::new(
                        FindingCode::SelfLoop,
                        cell.path.clone(),
                        format!("edge '{}' starts and ends at '{s}'", cell.id),
                    ));
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// geometry

struct Bounds {
    parent: String,
    id: String,
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

fn check_geometry(shape: &DocShape<'_>) -> Vec<Finding> {
    let mut out = Vec::new();
    let kinds: HashMap<&str, CellKind> = shape.cells.iter().map(|c| (c.id.as_str(), c.kind)).collect();
    let mut boxes: Vec<Bounds> = Vec::new();

    for cell in &shape.cells {
        let parent = cell.el.attr("parent").unwrap_or("");
        let parent_is_edge = kinds.get(parent) == Some(&CellKind::Edge);
        let Some(geo) = cell.geometry else {
            if cell.kind.is_vertex_like() {
                out.push(Finding::new(
                    FindingCode::MissingGeometry,
                    cell.path.clone(),
                    format!("vertex '{}' has no <mxGeometry>", cell.id),
                ));
            }
            continue;
        };
        let gpath = format!("{}/mxGeometry", cell.path);
        let mut nums = [0.0f64; 4];
        let mut numeric_ok = true;
        for (slot, key) in ["x", "y", "width", "height"].iter().enumerate() {
            match number_attr(geo, key) {
                Ok(v) => nums[slot] = v,
                Err(raw) => {
                    numeric_ok = false;
                    out.push(Finding::new(
                        FindingCode::NonNumeric,
                        gpath.clone(),
                        format!("cell '{}' has non-numeric {key}=\"{raw}\"", cell.id),
                    ));
                }
            }
        }
        for point in geometry_points(geo) {
            for key in ["x", "y"] {
                if let Err(raw) = number_attr(point, key) {
                    numeric_ok = false;
                    out.push(Finding::new(
                        FindingCode::NonNumeric,
                        gpath.clone(),
                        format!("cell '{}' has a point with non-numeric {key}=\"{raw}\"", cell.id),
                    ));
                }
            }
        }
        let [x, y, w, h] = nums;
        if w < 0.0 || h < 0.0 {
            out.push(Finding::new(FindingCode::NegativeSize, gpath.clone(), format!("cell '{}' has negative size {w}x{h}", cell.id)));
            continue;
        }
        if !numeric_ok {
            continue;
        }
        let relative = geo.attr("relative") == Some("1");
        let edge_label = parent_is_edge && relative;
        if cell.kind == CellKind::Vertex && !edge_label && (w == 0.0 || h == 0.0) {
            out.push(Finding::new(FindingCode::DegenerateSize, gpath.clone(), format!("vertex '{}' has zero size {w}x{h}", cell.id)));
        }
        if cell.kind.is_vertex_like() && geo.children.iter().any(|c| c.name == "Array" && c.attr("as") == Some("points")) {
            out.push(Finding::new(FindingCode::WaypointsOnVertex, gpath.clone(), format!("vertex '{}' carries routing points", cell.id)));
        }
        if parent_is_edge && cell.kind == CellKind::Vertex && cell.el.attr("value").unwrap_or("").trim().is_empty() {
            out.push(Finding::new(FindingCode::EmptyLabel, cell.path.clone(), format!("edge label cell '{}' has no text", cell.id)));
        }
        if cell.kind == CellKind::Vertex && !relative && w > 0.0 && h > 0.0 {
            boxes.push(Bounds { parent: parent.to_string(), id: cell.id.clone(), x, y, w, h });
        }
    }

    for (i, a) in boxes.iter().enumerate() {
        for b in &boxes[i + 1..] {
            if a.parent != b.parent {
                continue;
            }
            let ix = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
            let iy = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
            if ix <= 0.0 || iy <= 0.0 {
                continue;
            }
            let contains = |p: &Bounds, q: &Bounds| p.x <= q.x && p.y <= q.y && p.x + p.w >= q.x + q.w && p.y + p.h >= q.y + q.h;
            if contains(a, b) || contains(b, a) {
                continue;
            }
            out.push(Finding::new(
                FindingCode::Overlap,
                format!("{}/mxCell[@id='{}']", cell_root_path(shape), b.id),
                format!("vertices '{}' and '{}' partially overlap", a.id, b.id),
            ));
        }
    }
    out
}

fn cell_root_path(shape: &DocShape<'_>) -> &'static str {
    match shape.envelope {
        Envelope::MxFile => "/mxfile/diagram/mxGraphModel/root",
        Envelope::Bare => "/mxGraphModel/root",
    }
}

fn geometry_points(geo: &Element) -> impl Iterator<Item = &Element> {
    geo.children
        .iter()
        .flat_map(|c| match c.name.as_str() {
            "mxPoint" => std::slice::from_ref(c).iter(),
            "Array" => c.children.iter(),
            _ => [].iter(),
        })
        .filter(|p| p.name == "mxPoint")
}

/// Missing attributes read as 0; anything present must be a finite number.
fn number_attr(el: &Element, key: &str) -> Result<f64, String> {
    match el.attr(key) {
        None => Ok(0.0),
        Some(raw) => match raw.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(raw.to_string()),
        },
    }
}

// ---------------------------------------------------------------------------
// lowering

fn extras(el: &Element, known: &[&str]) -> Vec<(String, String)> {
    el.attrs.iter().filter(|(k, _)| !known.contains(&k.as_str())).cloned().collect()
}

/// Builds the typed document. Callers must have run [`check_tree`] without
/// errors; numbers that fail to parse here read as 0.
pub(crate) fn lower(_tree: &Element, shape: &DocShape<'_>) -> GraphDocument {
    let mut meta = HostMeta { envelope: shape.envelope, ..HostMeta::default() };
    if let Some(mxfile) = shape.mxfile {
        meta.host = mxfile.attr("host").map(str::to_string);
        meta.version = mxfile.attr("version").map(str::to_string);
        meta.mxfile_extra = extras(mxfile, &["host", "version"]);
    }
    if let Some(diagram) = shape.diagram {
        meta.diagram_id = diagram.attr("id").map(str::to_string);
        meta.diagram_name = diagram.attr("name").map(str::to_string);
        meta.diagram_extra = extras(diagram, &["id", "name"]);
    }

    let mut model = GraphModel { cells: Vec::with_capacity(shape.cells.len()), ..GraphModel::empty() };
    let mut model_extra = Vec::new();
    for (key, value) in &shape.model.attrs {
        let slot = match key.as_str() {
            "dx" => Some(&mut model.dx),
            "dy" => Some(&mut model.dy),
            "gridSize" => Some(&mut model.grid_size),
            "pageWidth" => Some(&mut model.page_width),
            "pageHeight" => Some(&mut model.page_height),
            _ => None,
        };
        match (slot, value.parse::<i64>()) {
            (Some(slot), Ok(v)) if v.to_string() == *value => *slot = Some(v),
            _ => model_extra.push((key.clone(), value.clone())),
        }
    }
    model.extra = model_extra;

    for raw in &shape.cells {
        let el = raw.el;
        let mut cell_extra = extras(el, CELL_KNOWN);
        // vertex/edge flags other than "1" are kept verbatim.
        for flag in ["vertex", "edge"] {
            if let Some(v) = el.attr(flag) {
                if v != "1" {
                    cell_extra.push((flag.to_string(), v.to_string()));
                }
            }
        }
        let cell = Cell {
            id: raw.id.clone(),
            kind: raw.kind,
            value: el.attr("value").unwrap_or("").to_string(),
            style: StyleMap::parse_lossy(el.attr("style").unwrap_or("")),
            parent: el.attr("parent").map(str::to_string),
            source: el.attr("source").map(str::to_string),
            target: el.attr("target").map(str::to_string),
            geometry: raw.geometry.map(lower_geometry),
            extra: reorder_like_source(el, cell_extra),
        };
        model.cells.push(cell);
    }
    GraphDocument { meta, model }
}

fn reorder_like_source(el: &Element, mut extra: Vec<(String, String)>) -> Vec<(String, String)> {
    let position = |key: &str| el.attrs.iter().position(|(k, _)| k == key).unwrap_or(usize::MAX);
    extra.sort_by_key(|(k, _)| position(k));
    extra
}

fn lower_point(el: &Element) -> Point {
    Point::new(number_attr(el, "x").unwrap_or(0.0), number_attr(el, "y").unwrap_or(0.0))
}

fn lower_geometry(el: &Element) -> Geometry {
    let mut extra = extras(el, &["x", "y", "width", "height", "relative", "as"]);
    match el.attr("relative") {
        Some("1") | None => {}
        Some(other) => extra.push(("relative".into(), other.to_string())),
    }
    let mut geo = Geometry {
        x: number_attr(el, "x").unwrap_or(0.0),
        y: number_attr(el, "y").unwrap_or(0.0),
        width: number_attr(el, "width").unwrap_or(0.0),
        height: number_attr(el, "height").unwrap_or(0.0),
        relative: el.attr("relative") == Some("1"),
        extra: reorder_like_source(el, extra),
        ..Geometry::default()
    };
    for child in &el.children {
        match (child.name.as_str(), child.attr("as")) {
            ("Array", Some("points")) => {
                geo.waypoints = child.children_named("mxPoint").map(lower_point).collect();
            }
            ("mxPoint", Some("sourcePoint")) => geo.source_point = Some(lower_point(child)),
            ("mxPoint", Some("targetPoint")) => geo.target_point = Some(lower_point(child)),
            ("mxPoint", Some("offset")) => geo.offset = Some(lower_point(child)),
            _ => {}
        }
    }
    geo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xml::parse_tree;

    fn codes(xml: &str) -> Vec<FindingCode> {
        let tree = parse_tree(xml).unwrap();
        let report = check_tree(&tree);
        let mut all = report.schema.clone();
        all.extend(report.references.unwrap_or_default());
        all.extend(report.geometry.unwrap_or_default());
        all.into_iter().map(|f| f.code).collect()
    }

    fn wrap(cells: &str) -> String {
        format!("<mxGraphModel><root><mxCell id=\"0\"/><mxCell id=\"1\" parent=\"0\"/>{cells}</root></mxGraphModel>")
    }

    #[test]
    fn schema_failures_skip_later_layers() {
        let tree = parse_tree("<mxfile><diagram/><diagram/></mxfile>").unwrap();
        let report = check_tree(&tree);
        assert_eq!(report.schema[0].code, FindingCode::MultiPage);
        assert!(report.references.is_none() && report.geometry.is_none());
    }

    #[test]
    fn compressed_payload_rejected() {
        assert_eq!(codes("<mxfile><diagram>7VhNb5tAEP0</diagram></mxfile>"), vec![FindingCode::UnexpectedElement]);
    }

    #[test]
    fn edge_reference_rules() {
        let xml = wrap(
            r#"<mxCell id="a" vertex="1" parent="1"><mxGeometry width="10" height="10" as="geometry"/></mxCell>
            <mxCell id="e" edge="1" parent="1" source="a" target="a"><mxGeometry relative="1" as="geometry"/></mxCell>
            <mxCell id="f" edge="1" parent="1"><mxGeometry relative="1" as="geometry"/></mxCell>
            <mxCell id="g" edge="1" parent="1" source="e"><mxGeometry relative="1" as="geometry"/></mxCell>"#,
        );
        assert_eq!(codes(&xml), vec![FindingCode::SelfLoop, FindingCode::UnanchoredEdge, FindingCode::DanglingEdge]);
    }

    #[test]
    fn parent_declared_later_is_orphan() {
        let xml = wrap(
            r#"<mxCell id="c" vertex="1" parent="g"><mxGeometry width="1" height="1" as="geometry"/></mxCell>
            <mxCell id="g" style="group" vertex="1" parent="1"><mxGeometry width="5" height="5" as="geometry"/></mxCell>"#,
        );
        assert_eq!(codes(&xml), vec![FindingCode::OrphanParent]);
    }

    #[test]
    fn geometry_rules() {
        let xml = wrap(
            r#"<mxCell id="a" vertex="1" parent="1"><mxGeometry width="0" height="10" as="geometry"/></mxCell>
            <mxCell id="b" vertex="1" parent="1"/>
            <mxCell id="c" vertex="1" parent="1"><mxGeometry x="0" y="0" width="10" height="10" as="geometry"><Array as="points"><mxPoint x="1" y="1"/></Array></mxGeometry></mxCell>"#,
        );
        assert_eq!(codes(&xml), vec![FindingCode::DegenerateSize, FindingCode::MissingGeometry, FindingCode::WaypointsOnVertex]);
    }

    #[test]
    fn overlap_is_a_warning_but_containment_is_not() {
        let xml = wrap(
            r#"<mxCell id="a" vertex="1" parent="1"><mxGeometry width="100" height="100" as="geometry"/></mxCell>
            <mxCell id="b" vertex="1" parent="1"><mxGeometry x="10" y="10" width="20" height="20" as="geometry"/></mxCell>
            <mxCell id="c" vertex="1" parent="1"><mxGeometry x="90" y="90" width="20" height="20" as="geometry"/></mxCell>"#,
        );
        assert_eq!(codes(&xml), vec![FindingCode::Overlap]);
    }

    #[test]
    fn edge_labels_may_have_zero_size() {
        let xml = wrap(
            r#"<mxCell id="a" vertex="1" parent="1"><mxGeometry width="10" height="10" as="geometry"/></mxCell>
            <mxCell id="b" vertex="1" parent="1"><mxGeometry x="50" width="10" height="10" as="geometry"/></mxCell>
            <mxCell id="e" edge="1" parent="1" source="a" target="b"><mxGeometry relative="1" as="geometry"/></mxCell>
            <mxCell id="l" value="yes" style="edgeLabel;" vertex="1" connectable="0" parent="e"><mxGeometry x="-0.2" relative="1" as="geometry"><mxPoint as="offset"/></mxGeometry></mxCell>"#,
        );
        assert!(codes(&xml).is_empty());
    }
}
