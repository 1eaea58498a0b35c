use std::fmt::Write;

use super::{Cell, CellKind, Envelope, Geometry, GraphDocument, Point};
use crate::xml::escape_attr;

/// Emits deterministic XML: fixed attribute order (known attributes first,
/// pass-through attributes after in source order) and two-space indentation.
pub fn serialize_document(doc: &GraphDocument) -> String {
    let mut out = String::new();
    let meta = &doc.meta;
    let depth = match meta.envelope {
        Envelope::MxFile => {
            let mut attrs: Vec<(&str, &str)> = Vec::new();
            if let Some(h) = &meta.host {
                attrs.push(("host", h));
            }
            if let Some(v) = &meta.version {
                attrs.push(("version", v));
            }
            attrs.extend(meta.mxfile_extra.iter().map(|(k, v)| (k.as_str(), v.as_str())));
            open_tag(&mut out, 0, "mxfile", &attrs, false);

            let mut attrs: Vec<(&str, &str)> = Vec::new();
            if let Some(id) = &meta.diagram_id {
                attrs.push(("id", id));
            }
            if let Some(name) = &meta.diagram_name {
                attrs.push(("name", name));
            }
            attrs.extend(meta.diagram_extra.iter().map(|(k, v)| (k.as_str(), v.as_str())));
            open_tag(&mut out, 1, "diagram", &attrs, false);
            2
        }
        Envelope::Bare => 0,
    };

    let model = &doc.model;
    let ints: Vec<(&str, String)> = [
        ("dx", model.dx),
        ("dy", model.dy),
        ("gridSize", model.grid_size),
        ("pageWidth", model.page_width),
        ("pageHeight", model.page_height),
    ]
    .into_iter()
    .filter_map(|(k, v)| v.map(|v| (k, v.to_string())))
    .collect();
    let mut attrs: Vec<(&str, &str)> = ints.iter().map(|(k, v)| (*k, v.as_str())).collect();
    attrs.extend(model.extra.iter().map(|(k, v)| (k.as_str(), v.as_str())));
    open_tag(&mut out, depth, "mxGraphModel", &attrs, false);
    open_tag(&mut out, depth + 1, "root", &[], false);
    for cell in &model.cells {
        write_cell(&mut out, depth + 2, cell);
    }
    close_tag(&mut out, depth + 1, "root");
    close_tag(&mut out, depth, "mxGraphModel");
    if meta.envelope == Envelope::MxFile {
        close_tag(&mut out, 1, "diagram");
        close_tag(&mut out, 0, "mxfile");
    }
    out
}

fn write_cell(out: &mut String, depth: usize, cell: &Cell) {
    let style = cell.style.to_string();
    let mut attrs: Vec<(&str, &str)> = vec![("id", &cell.id)];
    if cell.kind != CellKind::Structural || !cell.value.is_empty() {
        attrs.push(("value", &cell.value));
    }
    if !style.is_empty() {
        attrs.push(("style", &style));
    }
    match cell.kind {
        CellKind::Vertex | CellKind::Group => attrs.push(("vertex", "1")),
        CellKind::Edge => attrs.push(("edge", "1")),
        CellKind::Structural => {}
    }
    if let Some(p) = &cell.parent {
        attrs.push(("parent", p));
    }
    if let Some(s) = &cell.source {
        attrs.push(("source", s));
    }
    if let Some(t) = &cell.target {
        attrs.push(("target", t));
    }
    attrs.extend(cell.extra.iter().map(|(k, v)| (k.as_str(), v.as_str())));
    match &cell.geometry {
        None => open_tag(out, depth, "mxCell", &attrs, true),
        Some(geo) => {
            open_tag(out, depth, "mxCell", &attrs, false);
            write_geometry(out, depth + 1, geo);
            close_tag(out, depth, "mxCell");
        }
    }
}

fn write_geometry(out: &mut String, depth: usize, geo: &Geometry) {
    let nums: Vec<(&str, String)> = [("x", geo.x), ("y", geo.y), ("width", geo.width), ("height", geo.height)]
        .into_iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(k, v)| (k, fmt_num(v)))
        .collect();
    let mut attrs: Vec<(&str, &str)> = nums.iter().map(|(k, v)| (*k, v.as_str())).collect();
    if geo.relative {
        attrs.push(("relative", "1"));
    }
    attrs.extend(geo.extra.iter().map(|(k, v)| (k.as_str(), v.as_str())));
    attrs.push(("as", "geometry"));

    let has_children = geo.source_point.is_some() || geo.target_point.is_some() || !geo.waypoints.is_empty() || geo.offset.is_some();
    if !has_children {
        open_tag(out, depth, "mxGeometry", &attrs, true);
        return;
    }
    open_tag(out, depth, "mxGeometry", &attrs, false);
    if let Some(p) = geo.source_point {
        write_point(out, depth + 1, p, Some("sourcePoint"));
    }
    if let Some(p) = geo.target_point {
        write_point(out, depth + 1, p, Some("targetPoint"));
    }
    if !geo.waypoints.is_empty() {
        open_tag(out, depth + 1, "Array", &[("as", "points")], false);
        for p in &geo.waypoints {
            write_point(out, depth + 2, *p, None);
        }
        close_tag(out, depth + 1, "Array");
    }
    if let Some(p) = geo.offset {
        write_point(out, depth + 1, p, Some("offset"));
    }
    close_tag(out, depth, "mxGeometry");
}

fn write_point(out: &mut String, depth: usize, p: Point, role: Option<&str>) {
    let x = fmt_num(p.x);
    let y = fmt_num(p.y);
    let mut attrs: Vec<(&str, &str)> = Vec::new();
    if p.x != 0.0 {
        attrs.push(("x", &x));
    }
    if p.y != 0.0 {
        attrs.push(("y", &y));
    }
    if let Some(role) = role {
        attrs.push(("as", role));
    }
    open_tag(out, depth, "mxPoint", &attrs, true);
}

/// Shortest representation that parses back to the same f64.
pub(crate) fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn open_tag(out: &mut String, depth: usize, name: &str, attrs: &[(&str, &str)], empty: bool) {
    indent(out, depth);
    out.push('<');
    out.push_str(name);
    for (k, v) in attrs {
        let _ = write!(out, " {k}=\"{}\"", escape_attr(v));
    }
    out.push_str(if empty { " />\n" } else { ">\n" });
}

fn close_tag(out: &mut String, depth: usize, name: &str) {
    indent(out, depth);
    let _ = writeln!(out, "</{name}>");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}
