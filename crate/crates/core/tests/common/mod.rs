//! Shared fixtures, generators and independent oracles for the integration
//! tests and the acceptance target.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use dwt_core::ir::{Axis, Constraint, Element, ElementClass, LayoutPlan, Region, IR_SCHEMA};
use dwt_core::mxgraph::{Cell, Envelope, Geometry, GraphDocument, GraphModel, HostMeta, Point, StyleCatalog, StyleMap};
use dwt_core::orchestrator::{Completion, InputDiagram, ScriptedClient, Usage};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn sorted_files(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    out.sort();
    out
}

/// `(stem, xml)` for every valid fixture.
pub fn valid_fixtures() -> Vec<(String, String)> {
    sorted_files(&fixtures().join("valid"), "xml")
        .into_iter()
        .map(|p| (p.file_stem().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect()
}

/// `(class, expected code, xml)` for every invalid fixture, named `<class>.<CODE>.xml`.
pub fn invalid_fixtures() -> Vec<(String, String, String)> {
    sorted_files(&fixtures().join("invalid"), "xml")
        .into_iter()
        .map(|p| {
            let stem = p.file_stem().unwrap().to_string_lossy().into_owned();
            let (class, code) = stem.split_once('.').expect("<class>.<CODE>.xml");
            (class.to_string(), code.to_string(), std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

pub fn three_boxes() -> String {
    std::fs::read_to_string(fixtures().join("valid/01_three_boxes_two_arrows.xml")).unwrap()
}

// ---------------------------------------------------------------------------
// Random documents

const LABEL_PARTS: [&str; 12] =
    ["Load", "Train & eval", "<b>bold</b>", "a < b", "\"quoted\"", "it's", "Größe", "数据", "x\ny", "  padded ", "", "tab\there"];
const VERTEX_STYLES: [&str; 8] = [
    "rounded=1;whiteSpace=wrap;html=1;",
    "ellipse;fillColor=#dae8fc;strokeColor=#6c8ebf;",
    "rhombus;",
    "shape=cylinder;",
    "text;html=1;align=center;",
    "",
    "shape=hexagon;perimeter=hexagonPerimeter;fontColor=#333333;",
    "triangle;direction=north;",
];
const EDGE_STYLES: [&str; 4] = ["edgeStyle=orthogonalEdgeStyle;html=1;", "", "dashed=1;endArrow=none;", "curved=1;startArrow=classic;"];

fn coord(r: &mut impl Rng) -> f64 {
    match r.random_range(0..3) {
        0 => r.random_range(-500..1500) as f64,
        1 => r.random_range(-500.0..1500.0),
        _ => r.random_range(-2000..6000) as f64 / 4.0,
    }
}

fn label(r: &mut impl Rng) -> String {
    (0..r.random_range(0..3)).map(|_| *LABEL_PARTS.choose(r).unwrap()).collect::<Vec<_>>().join(" ")
}

/// A structurally valid document with groups, nesting, edges, waypoints and
/// edge labels.
pub fn random_document(r: &mut impl Rng) -> GraphDocument {
    let mut model = GraphModel::empty();
    if r.random_bool(0.5) {
        model.dx = Some(r.random_range(0..2000));
        model.grid_size = Some(10);
        model.page_width = Some(850);
        model.page_height = Some(1100);
    }
    let mut vertex_ids: Vec<String> = Vec::new();
    let mut group_ids: Vec<String> = Vec::new();
    for i in 0..r.random_range(0..12) {
        let id = format!("v{i}");
        let is_group = r.random_bool(0.2);
        let style = if is_group { "container=1;dashed=1;".to_string() } else { VERTEX_STYLES.choose(r).unwrap().to_string() };
        let geo = Geometry::rect(coord(r), coord(r), r.random_range(1..400) as f64, r.random_range(1..300) as f64 / 2.0);
        let mut cell = Cell::vertex(id.clone(), label(r), StyleMap::parse_lossy(&style), geo);
        if !group_ids.is_empty() && r.random_bool(0.4) {
            cell = cell.with_parent(group_ids.choose(r).unwrap().clone());
        }
        if is_group {
            group_ids.push(id.clone());
        }
        vertex_ids.push(id);
        model.cells.push(cell);
    }
    if !vertex_ids.is_empty() {
        for i in 0..r.random_range(0..15) {
            let id = format!("e{i}");
            let s = vertex_ids.choose(r).unwrap().clone();
            let t = vertex_ids.choose(r).unwrap().clone();
            let mut cell = Cell::edge(id.clone(), Some(s), Some(t), label(r), StyleMap::parse_lossy(EDGE_STYLES.choose(r).unwrap()));
            let geo = cell.geometry.as_mut().unwrap();
            for _ in 0..r.random_range(0..3) {
                geo.waypoints.push(Point::new(coord(r), coord(r)));
            }
            model.cells.push(cell);
            if r.random_bool(0.2) {
                let mut geo = Geometry::edge();
                geo.x = r.random_range(-1.0..1.0);
                geo.offset = Some(Point::new(0.0, r.random_range(-20..20) as f64));
                let mut lbl = Cell::vertex(format!("{id}-label"), label(r), StyleMap::parse_lossy("edgeLabel;html=1;"), geo);
                lbl.parent = Some(id);
                model.cells.push(lbl);
            }
        }
    }
    let meta = if r.random_bool(0.3) {
        HostMeta { envelope: Envelope::Bare, ..HostMeta::default() }
    } else {
        HostMeta {
            envelope: Envelope::MxFile,
            host: r.random_bool(0.5).then(|| "app.diagrams.net".to_string()),
            diagram_id: Some(format!("d{}", r.random_range(0..100))),
            diagram_name: Some("Page-1".to_string()),
            ..HostMeta::default()
        }
    };
    GraphDocument { meta, model }
}

// ---------------------------------------------------------------------------
// Random layout plans

/// A plan whose aligns are realizable by construction: every element owns a
/// distinct hidden grid cell, `Horizontal` aligns only join elements of one
/// hidden row (left to right) and `Vertical` aligns one hidden column (top to
/// bottom).
pub fn random_plan(r: &mut impl Rng) -> LayoutPlan {
    let n = r.random_range(1..=10);
    let regions: Vec<Region> = (0..r.random_range(1..=3))
        .map(|i| Region { id: format!("r{i}"), label: format!("Region {i}"), bounds_hint: String::new() })
        .collect();
    let classes = [ElementClass::Process, ElementClass::Decision, ElementClass::DataStore, ElementClass::Entity, ElementClass::Annotation];
    let mut cells: Vec<(usize, usize)> = (0..4).flat_map(|row| (0..4).map(move |col| (row, col))).collect();
    let mut grid = Vec::new();
    for _ in 0..n {
        let k = r.random_range(0..cells.len());
        grid.push(cells.swap_remove(k));
    }
    let elements: Vec<Element> = (0..n)
        .map(|i| Element {
            id: format!("el{i}"),
            class_label: classes.choose(r).unwrap().clone(),
            text: format!("Element {i}"),
            region: regions.choose(r).unwrap().id.clone(),
            style_role: String::new(),
            percept_ref: None,
        })
        .collect();
    let mut constraints = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let ((ra, ca), (rb, cb)) = (grid[a], grid[b]);
            if ra == rb && ca < cb && r.random_bool(0.5) {
                constraints.push(Constraint::Align { a: elements[a].id.clone(), b: elements[b].id.clone(), axis: Axis::Horizontal });
            }
            if ca == cb && ra < rb && r.random_bool(0.5) {
                constraints.push(Constraint::Align { a: elements[a].id.clone(), b: elements[b].id.clone(), axis: Axis::Vertical });
            }
        }
    }
    for _ in 0..r.random_range(0..=n * 2) {
        let (a, b) = (r.random_range(0..n), r.random_range(0..n));
        constraints.push(Constraint::Connect {
            from: elements[a].id.clone(),
            to: elements[b].id.clone(),
            label: r.random_bool(0.3).then(|| "flow".to_string()),
        });
    }
    for e in &elements {
        if r.random_bool(0.2) {
            constraints.push(Constraint::Layer { element: e.id.clone(), z: r.random_range(-2..3) });
        }
    }
    LayoutPlan { schema: IR_SCHEMA.to_string(), regions, elements, constraints, styles: StyleCatalog::new() }
}

// ---------------------------------------------------------------------------
// Scripted pipeline runs

pub const PERCEPT_JSON: &str = r#"{"schema":"dwt-ir/1","hierarchy":[{"id":"p-load","label":"Load data","primitive":"rounded box"},{"id":"p-train","label":"Train model","primitive":"rounded box"},{"id":"p-eval","label":"Evaluate","primitive":"ellipse"}],"gestalt_groups":[{"members":["p-load","p-train"],"principle":"proximity"}],"encodings":[{"visual_variable":"color","semantic_role":"output stage"}],"connectors":[{"from":"p-load","to":"p-train"},{"from":"p-train","to":"p-eval"}]}"#;

pub const PLAN_JSON: &str = r#"{"schema":"dwt-ir/1","regions":[{"id":"main","label":"Pipeline"}],"elements":[{"id":"load","class":"process","text":"Load data","region":"main","percept_ref":"p-load"},{"id":"train","class":"process","text":"Train model","region":"main","percept_ref":"p-train"},{"id":"eval","class":"entity","text":"Evaluate","region":"main","percept_ref":"p-eval"}],"constraints":[{"type":"align","a":"load","b":"train","axis":"horizontal"},{"type":"connect","from":"load","to":"train"},{"type":"connect","from":"train","to":"eval","label":"metrics"}]}"#;

pub fn percept_reply() -> String {
    format!("Here is what I see.\n```json\n{PERCEPT_JSON}\n```")
}

pub fn plan_reply() -> String {
    format!("Layout plan:\n```json\n{PLAN_JSON}\n```")
}

pub fn xml_reply(xml: &str) -> String {
    format!("```xml\n{xml}\n```")
}

/// The three-box fixture with the first `k` vertex widths made negative:
/// one error per broken vertex.
pub fn broken_three_boxes(k: usize) -> String {
    let mut xml = three_boxes();
    for _ in 0..k {
        xml = xml.replacen("width=\"120\"", "width=\"-120\"", 1);
    }
    xml
}

/// Stage-one replies, then round 0 carrying `k` errors and each later round
/// fixing one.
pub fn k_error_script(k: usize) -> Vec<String> {
    let mut out = vec![percept_reply(), plan_reply()];
    out.extend((0..=k).map(|i| xml_reply(&broken_three_boxes(k - i))));
    out
}

pub fn scripted(texts: Vec<String>) -> ScriptedClient {
    ScriptedClient::from_texts(texts)
}

pub fn script_json(texts: &[String]) -> String {
    let responses: Vec<Completion> = texts.iter().map(|t| Completion::new(t.clone(), Usage::new(100, 50))).collect();
    serde_json::to_string_pretty(&serde_json::json!({ "responses": responses })).unwrap()
}

/// A small valid PNG.
pub fn tiny_png() -> Vec<u8> {
    let svg = r##"<svg xmlns="http://www.w3.org/2000/svg" width="4" height="4"><rect width="4" height="4" fill="#ffffff"/></svg>"##;
    dwt_core::render::rasterize(svg, 1.0).unwrap()
}

pub fn tiny_image() -> InputDiagram {
    InputDiagram::from_bytes(tiny_png()).unwrap()
}

// ---------------------------------------------------------------------------
// Oracles

/// Point where the ray from the center of `(x, y, w, h)` toward `toward`
/// leaves the box, by parametric slab clipping.
pub fn ray_clip(x: f64, y: f64, w: f64, h: f64, toward: (f64, f64)) -> (f64, f64) {
    let (cx, cy) = (x + w / 2.0, y + h / 2.0);
    let (dx, dy) = (toward.0 - cx, toward.1 - cy);
    if dx == 0.0 && dy == 0.0 {
        return (cx, cy);
    }
    let tx = if dx != 0.0 { (w / 2.0) / dx.abs() } else { f64::INFINITY };
    let ty = if dy != 0.0 { (h / 2.0) / dy.abs() } else { f64::INFINITY };
    let t = tx.min(ty);
    (cx + dx * t, cy + dy * t)
}

/// Distance from `p` to the outline of the box.
pub fn distance_to_outline(x: f64, y: f64, w: f64, h: f64, p: (f64, f64)) -> f64 {
    let (px, py) = p;
    let inside = px >= x && px <= x + w && py >= y && py <= y + h;
    if inside {
        (px - x).min(x + w - px).min(py - y).min(y + h - py)
    } else {
        let dx = (x - px).max(0.0).max(px - (x + w));
        let dy = (y - py).max(0.0).max(py - (y + h));
        dx.hypot(dy)
    }
}

/// Best total weight over every injective assignment of rows to columns,
/// by exhaustive enumeration of column permutations with optional skips.
pub fn brute_force_best(w: &[Vec<Option<f64>>], cols: usize) -> f64 {
    fn go(w: &[Vec<Option<f64>>], i: usize, used: &mut Vec<bool>) -> f64 {
        if i == w.len() {
            return 0.0;
        }
        let mut best = go(w, i + 1, used);
        for j in 0..used.len() {
            if let Some(x) = w[i][j] {
                if !used[j] {
                    used[j] = true;
                    best = best.max(x + go(w, i + 1, used));
                    used[j] = false;
                }
            }
        }
        best
    }
    go(w, 0, &mut vec![false; cols])
}

/// Counts of `class="shape"` and `class="connector"` elements.
pub fn svg_counts(svg: &str) -> (usize, usize) {
    (svg.matches("class=\"shape\"").count(), svg.matches("class=\"connector\"").count())
}

/// `(cell id, points)` of every connector path, parsed from `d="M x y L x y ..."`.
pub fn connector_paths(svg: &str) -> Vec<(String, Vec<(f64, f64)>)> {
    let re = regex::Regex::new(r#"<path class="connector" data-cell-id="([^"]*)" d="([^"]*)""#).unwrap();
    re.captures_iter(svg)
        .map(|c| {
            let nums: Vec<f64> = c[2].split_whitespace().filter(|t| *t != "M" && *t != "L").map(|t| t.parse().unwrap()).collect();
            (c[1].to_string(), nums.chunks(2).map(|p| (p[0], p[1])).collect())
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Hermetic benchmark corpus

/// Writes `n` entries (reference XML, rendered PNG, and a `<id>.script.json`
/// whose replies reproduce the reference) plus `manifest.json` into `dir`.
/// Returns the manifest path.
pub fn write_bench(dir: &Path, n: usize) -> PathBuf {
    use dwt_core::render::{rasterize, render_svg, RenderOptions};
    let mut entries = Vec::new();
    for (name, xml) in valid_fixtures().into_iter().take(n) {
        let model = dwt_core::mxgraph::parse_document(&xml).unwrap().model;
        let png = rasterize(&render_svg(&model, &RenderOptions::default()).unwrap(), 1.0).unwrap();
        std::fs::write(dir.join(format!("{name}.xml")), &xml).unwrap();
        std::fs::write(dir.join(format!("{name}.png")), png).unwrap();
        let script = vec![percept_reply(), plan_reply(), xml_reply(&xml)];
        std::fs::write(dir.join(format!("{name}.script.json")), script_json(&script)).unwrap();
        entries.push(serde_json::json!({"id": name, "image_path": format!("{name}.png"), "reference_xml_path": format!("{name}.xml")}));
    }
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&serde_json::json!({ "entries": entries })).unwrap()).unwrap();
    path
}

/// Checks every connector of `svg` (rendered with `opts`) against the model:
/// each attached end lies within 0.5 px of its box outline, and for straight
/// edges between two distinct boxes each end equals the center-ray clip.
pub fn check_edge_endpoints(model: &GraphModel, svg: &str, opts: &dwt_core::render::RenderOptions) -> Result<usize, String> {
    let layout = dwt_core::render::layout_model(model).map_err(|e| e.to_string())?;
    let Some((lo, _)) = layout.extent() else { return Ok(0) };
    let (dx, dy) = (opts.padding - lo.x.min(0.0) * opts.scale, opts.padding - lo.y.min(0.0) * opts.scale);
    let s = opts.scale;
    let boxed = |id: &str| layout.boxes.get(id).map(|b| (b.x * s + dx, b.y * s + dy, b.width * s, b.height * s));
    let mut checked = 0;
    for (id, pts) in connector_paths(svg) {
        let edge = model.cell(&id).ok_or_else(|| format!("unknown connector {id}"))?;
        let (first, last) = (pts[0], *pts.last().unwrap());
        for (end, p) in [(edge.source.as_deref(), first), (edge.target.as_deref(), last)] {
            if let Some((x, y, w, h)) = end.and_then(boxed) {
                let d = distance_to_outline(x, y, w, h, p);
                if d > 0.5 {
                    return Err(format!("{id}: endpoint {p:?} is {d:.3} px off its box"));
                }
                checked += 1;
            }
        }
        let straight = edge.geometry.as_ref().is_none_or(|g| g.waypoints.is_empty()) && edge.source != edge.target;
        if let (true, Some(sb), Some(tb)) = (straight, edge.source.as_deref().and_then(boxed), edge.target.as_deref().and_then(boxed)) {
            let center = |b: (f64, f64, f64, f64)| (b.0 + b.2 / 2.0, b.1 + b.3 / 2.0);
            let want = [ray_clip(sb.0, sb.1, sb.2, sb.3, center(tb)), ray_clip(tb.0, tb.1, tb.2, tb.3, center(sb))];
            for (got, want) in [first, last].into_iter().zip(want) {
                let d = (got.0 - want.0).hypot(got.1 - want.1);
                if d > 0.5 {
                    return Err(format!("{id}: endpoint {got:?} vs anchor {want:?} ({d:.3} px)"));
                }
            }
        }
    }
    Ok(checked)
}
