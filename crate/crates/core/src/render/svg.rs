use std::fmt::Write;

use super::layout::{layout_model, EdgeRoute, Rect};
use super::text::{fit_label, strip_markup, LINE_HEIGHT_EM};
use super::{RenderError, RenderOptions, ShapeKind};
use crate::mxgraph::{Cell, CellKind, GraphModel, Point, StyleMap};
use crate::xml::escape_attr;

const ARROW_DEFS: &str = concat!(
    "<defs>",
    "<marker id=\"arrow-end\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" orient=\"auto\">",
    "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#000000\"/></marker>",
    "<marker id=\"arrow-start\" viewBox=\"0 0 10 10\" refX=\"0\" refY=\"5\" markerWidth=\"8\" markerHeight=\"8\" orient=\"auto\">",
    "<path d=\"M 10 0 L 0 5 L 10 10 z\" fill=\"#000000\"/></marker>",
    "</defs>\n"
);

/// Renders `model` to SVG text. Output depends only on the inputs.
///
/// Every vertex-like cell yields one element with `class="shape"` and every
/// edge one `<path class="connector">`, both tagged with `data-cell-id`, in
/// document order.
pub fn render_svg(model: &GraphModel, opts: &RenderOptions) -> Result<String, RenderError> {
    if !(opts.scale.is_finite() && opts.scale > 0.0) {
        return Err(RenderError::InvalidOptions(format!("scale must be > 0, got {}", opts.scale)));
    }
    if !(opts.padding.is_finite() && opts.padding >= 0.0) {
        return Err(RenderError::InvalidOptions(format!("padding must be >= 0, got {}", opts.padding)));
    }
    if opts.font.ladder.is_empty() || opts.font.ladder.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(RenderError::InvalidOptions("font ladder must hold positive sizes".into()));
    }
    let shapes: Vec<Option<ShapeKind>> = model.cells.iter().map(ShapeKind::for_cell).collect::<Result<_, _>>()?;
    let layout = layout_model(model)?;

    let (lo, hi) = layout.extent().unwrap_or((Point::new(0.0, 0.0), Point::new(0.0, 0.0)));
    let min = Point::new(lo.x.min(0.0), lo.y.min(0.0));
    let max = Point::new(hi.x.max(0.0), hi.y.max(0.0));
    let view = View { scale: opts.scale, dx: opts.padding - min.x * opts.scale, dy: opts.padding - min.y * opts.scale };
    let width = (max.x - min.x) * opts.scale + 2.0 * opts.padding;
    let height = (max.y - min.y) * opts.scale + 2.0 * opts.padding;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = num(width),
        h = num(height)
    );
    out.push_str(ARROW_DEFS);
    let _ = writeln!(
        out,
        "<rect class=\"background\" x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
        num(width),
        num(height),
        opts.background.hex()
    );

    for (cell, shape) in model.cells.iter().zip(&shapes) {
        match (cell.kind, shape) {
            (CellKind::Edge, _) => {
                let route = &layout.routes[&cell.id];
                write_edge(&mut out, cell, route, &view, opts);
            }
            (_, Some(shape)) => {
                let Some(rect) = layout.boxes.get(&cell.id) else { continue };
                write_vertex(&mut out, cell, *shape, &view.rect(rect), opts);
            }
            _ => {}
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

struct View {
    scale: f64,
    dx: f64,
    dy: f64,
}

impl View {
    fn point(&self, p: Point) -> Point {
        Point::new(p.x * self.scale + self.dx, p.y * self.scale + self.dy)
    }

    fn rect(&self, r: &Rect) -> Rect {
        let p = self.point(Point::new(r.x, r.y));
        Rect::new(p.x, p.y, r.width * self.scale, r.height * self.scale)
    }
}

/// Fixed two-decimal formatting with trailing zeros trimmed.
fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Style colour if it is a plain hex or named colour, else `default`.
fn color(style: &StyleMap, key: &str, default: &str) -> String {
    match style.get(key) {
        Some(v) if is_safe_color(v) => v.to_string(),
        _ => default.to_string(),
    }
}

fn is_safe_color(v: &str) -> bool {
    match v.strip_prefix('#') {
        Some(hex) => matches!(hex.len(), 3 | 6) && hex.chars().all(|c| c.is_ascii_hexdigit()),
        None => !v.is_empty() && v.chars().all(|c| c.is_ascii_alphabetic()),
    }
}

fn stroke_attrs(style: &StyleMap, default_stroke: &str, scale: f64) -> String {
    let width = style.get("strokeWidth").and_then(|w| w.parse::<f64>().ok()).filter(|w| w.is_finite() && *w >= 0.0).unwrap_or(1.0);
    let mut attrs = format!(" stroke=\"{}\" stroke-width=\"{}\"", color(style, "strokeColor", default_stroke), num(width * scale));
    if style.is_set("dashed") {
        attrs.push_str(" stroke-dasharray=\"6 4\"");
    }
    attrs
}

fn polygon(points: &[(f64, f64)]) -> String {
    points.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect::<Vec<_>>().join(" ")
}

fn write_vertex(out: &mut String, cell: &Cell, shape: ShapeKind, r: &Rect, opts: &RenderOptions) {
    let style = &cell.style;
    let id = escape_attr(&cell.id);
    let (default_fill, default_stroke) = match shape {
        ShapeKind::Text => ("none", "none"),
        ShapeKind::GroupFrame => ("none", "#999999"),
        _ => ("#ffffff", "#000000"),
    };
    let paint = format!(" fill=\"{}\"{}", color(style, "fillColor", default_fill), stroke_attrs(style, default_stroke, opts.scale));
    out.push_str("<g class=\"vertex\">");
    let (x, y, w, h) = (r.x, r.y, r.width, r.height);
    let _ = match shape {
        ShapeKind::Rectangle | ShapeKind::Text => write!(
            out,
            "<rect class=\"shape\" data-cell-id=\"{id}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"{paint}/>",
            num(x),
            num(y),
            num(w),
            num(h)
        ),
        ShapeKind::GroupFrame => {
            write!(
            out,
            "<rect class=\"shape\" data-cell-id=\"{id}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"{paint} stroke-dasharray=\"4 2\"/>",
            num(x), num(y), num(w), num(h)
        )
        }
        ShapeKind::Rounded => {
            let radius = w.min(h) * 0.15;
            write!(
                out,
                "<rect class=\"shape\" data-cell-id=\"{id}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"{r}\" ry=\"{r}\"{paint}/>",
                num(x),
                num(y),
                num(w),
                num(h),
                r = num(radius)
            )
        }
        ShapeKind::Ellipse => write!(
            out,
            "<ellipse class=\"shape\" data-cell-id=\"{id}\" cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\"{paint}/>",
            num(x + w / 2.0),
            num(y + h / 2.0),
            num(w / 2.0),
            num(h / 2.0)
        ),
        ShapeKind::Rhombus => {
            let pts = polygon(&[(x + w / 2.0, y), (x + w, y + h / 2.0), (x + w / 2.0, y + h), (x, y + h / 2.0)]);
            write!(out, "<polygon class=\"shape\" data-cell-id=\"{id}\" points=\"{pts}\"{paint}/>")
        }
        ShapeKind::Triangle => {
            let pts = polygon(&[(x, y), (x + w, y + h / 2.0), (x, y + h)]);
            write!(out, "<polygon class=\"shape\" data-cell-id=\"{id}\" points=\"{pts}\"{paint}/>")
        }
        ShapeKind::Hexagon => {
            let s = w * 0.25;
            let pts = polygon(&[(x + s, y), (x + w - s, y), (x + w, y + h / 2.0), (x + w - s, y + h), (x + s, y + h), (x, y + h / 2.0)]);
            write!(out, "<polygon class=\"shape\" data-cell-id=\"{id}\" points=\"{pts}\"{paint}/>")
        }
        ShapeKind::Parallelogram => {
            let s = w * 0.2;
            let pts = polygon(&[(x + s, y), (x + w, y), (x + w - s, y + h), (x, y + h)]);
            write!(out, "<polygon class=\"shape\" data-cell-id=\"{id}\" points=\"{pts}\"{paint}/>")
        }
        ShapeKind::Cylinder => {
            let e = (h * 0.15).min(w / 2.0);
            let (l, rt, top, bot, rx) = (num(x), num(x + w), num(y + e), num(y + h - e), num(w / 2.0));
            let ry = num(e);
            write!(
                out,
                "<path class=\"shape\" data-cell-id=\"{id}\" d=\"M {l} {top} A {rx} {ry} 0 0 1 {rt} {top} L {rt} {bot} A {rx} {ry} 0 0 1 {l} {bot} Z M {l} {top} A {rx} {ry} 0 0 0 {rt} {top}\"{paint}/>"
            )
        }
    };
    write_label(out, &cell.value, style, r, opts);
    out.push_str("</g>\n");
}

fn write_edge(out: &mut String, cell: &Cell, route: &EdgeRoute, view: &View, opts: &RenderOptions) {
    let style = &cell.style;
    let pts: Vec<Point> = route.points.iter().map(|p| view.point(*p)).collect();
    let mut d = String::new();
    for (i, p) in pts.iter().enumerate() {
        let _ = write!(d, "{}{} {}", if i == 0 { "M " } else { " L " }, num(p.x), num(p.y));
    }
    let mut markers = String::new();
    if style.get("endArrow") != Some("none") {
        markers.push_str(" marker-end=\"url(#arrow-end)\"");
    }
    if style.get("startArrow").is_some_and(|a| a != "none") {
        markers.push_str(" marker-start=\"url(#arrow-start)\"");
    }
    let _ = write!(
        out,
        "<g class=\"edge\"><path class=\"connector\" data-cell-id=\"{}\" d=\"{d}\" fill=\"none\"{}{markers}/>",
        escape_attr(&cell.id),
        stroke_attrs(style, "#000000", opts.scale)
    );
    let mid = view.point(route.point_at(0.5));
    write_label(out, &cell.value, style, &Rect::new(mid.x, mid.y, 0.0, 0.0), opts);
    out.push_str("</g>\n");
}

fn write_label(out: &mut String, value: &str, style: &StyleMap, r: &Rect, opts: &RenderOptions) {
    let text = if style.is_set("html") || value.contains('<') { strip_markup(value) } else { value.trim().to_string() };
    if text.is_empty() {
        return;
    }
    // An explicit fontSize heads the ladder; smaller ladder steps follow.
    let mut ladder: Vec<f64> = Vec::new();
    if let Some(size) = style.get("fontSize").and_then(|s| s.parse::<f64>().ok()).filter(|s| s.is_finite() && *s > 0.0) {
        ladder.push(size * opts.scale);
        ladder.extend(opts.font.ladder.iter().map(|s| s * opts.scale).filter(|s| *s < size * opts.scale));
    } else {
        ladder.extend(opts.font.ladder.iter().map(|s| s * opts.scale));
    }
    let pad = 4.0 * opts.scale;
    let (size, lines) = fit_label(&text, (r.width - 2.0 * pad).max(0.0), r.height, &ladder);
    let line_h = size * LINE_HEIGHT_EM;
    let c = r.center();
    let top = c.y - line_h * lines.len() as f64 / 2.0;
    let _ = write!(
        out,
        "<text class=\"label\" x=\"{}\" font-family=\"{}\" font-size=\"{}\" text-anchor=\"middle\" fill=\"{}\">",
        num(c.x),
        escape_attr(&opts.font.family),
        num(size),
        color(style, "fontColor", "#000000")
    );
    for (i, line) in lines.iter().enumerate() {
        // Baseline sits ~0.35em below the line's centre.
        let baseline = top + line_h * (i as f64 + 0.5) + size * 0.35;
        let _ = write!(out, "<tspan x=\"{}\" y=\"{}\">{}</tspan>", num(c.x), num(baseline), escape_text(line));
    }
    out.push_str("</text>");
}

fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
