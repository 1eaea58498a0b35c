//! Absolute placement of vertices and edge routes.

use std::collections::HashMap;

use super::RenderError;
use crate::mxgraph::{Cell, CellKind, GraphModel, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, width: f64, height: f64) -> Rect {
        Rect { x, y, width, height }
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRoute {
    /// Polyline from the source anchor to the target anchor.
    pub points: Vec<Point>,
}

impl EdgeRoute {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| dist(w[0], w[1])).sum()
    }

    /// Point at fraction `t` in [0, 1] of the polyline length.
    pub fn point_at(&self, t: f64) -> Point {
        let total = self.length();
        if total == 0.0 {
            return self.points[0];
        }
        let mut remaining = t.clamp(0.0, 1.0) * total;
        for w in self.points.windows(2) {
            let seg = dist(w[0], w[1]);
            if remaining <= seg && seg > 0.0 {
                let f = remaining / seg;
                return Point::new(w[0].x + (w[1].x - w[0].x) * f, w[0].y + (w[1].y - w[0].y) * f);
            }
            remaining -= seg;
        }
        *self.points.last().expect("route has points")
    }
}

/// Absolute boxes for vertex-like cells and routes for edges.
#[derive(Debug, Clone, Default)]
pub struct ModelLayout {
    pub boxes: HashMap<String, Rect>,
    pub routes: HashMap<String, EdgeRoute>,
}

impl ModelLayout {
    /// Bounding box over all boxes and route points, if anything is drawn.
    pub fn extent(&self) -> Option<(Point, Point)> {
        let mut pts = Vec::new();
        for r in self.boxes.values() {
            pts.push(Point::new(r.x, r.y));
            pts.push(Point::new(r.right(), r.bottom()));
        }
        for route in self.routes.values() {
            pts.extend(route.points.iter().copied());
        }
        let first = *pts.first()?;
        Some(
            pts.iter()
                .fold((first, first), |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y)))),
        )
    }
}

const DETACHED_OFFSET: f64 = 40.0;
const LOOP_REACH: f64 = 20.0;

fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

fn shifted(p: Point, origin: Point) -> Point {
    Point::new(p.x + origin.x, p.y + origin.y)
}

/// Border point of `rect` facing `toward`.
///
/// When `orthogonal` is set and `toward` lies within the box's horizontal
/// (vertical) span, the anchor is on the top/bottom (left/right) border at
/// that coordinate. Otherwise it is where the ray from the centre to
/// `toward` leaves the box.
pub fn anchor_toward(rect: &Rect, toward: Point, orthogonal: bool) -> Point {
    let c = rect.center();
    if rect.width == 0.0 && rect.height == 0.0 {
        return c;
    }
    let inside_x = toward.x >= rect.x && toward.x <= rect.right();
    let inside_y = toward.y >= rect.y && toward.y <= rect.bottom();
    if orthogonal && inside_x && !inside_y {
        let y = if toward.y < rect.y { rect.y } else { rect.bottom() };
        return Point::new(toward.x, y);
    }
    if orthogonal && inside_y && !inside_x {
        let x = if toward.x < rect.x { rect.x } else { rect.right() };
        return Point::new(x, toward.y);
    }
    let (dx, dy) = (toward.x - c.x, toward.y - c.y);
    if dx == 0.0 && dy == 0.0 {
        return Point::new(rect.right(), c.y);
    }
    let tx = if dx != 0.0 { (rect.width / 2.0) / dx.abs() } else { f64::INFINITY };
    let ty = if dy != 0.0 { (rect.height / 2.0) / dy.abs() } else { f64::INFINITY };
    let t = tx.min(ty);
    Point::new(c.x + dx * t, c.y + dy * t)
}

pub fn layout_model(model: &GraphModel) -> Result<ModelLayout, RenderError> {
    let mut layout = ModelLayout::default();
    let kinds: HashMap<&str, CellKind> = model.cells.iter().map(|c| (c.id.as_str(), c.kind)).collect();
    let under_edge = |cell: &Cell| cell.parent.as_deref().and_then(|p| kinds.get(p)) == Some(&CellKind::Edge);

    for cell in model.cells.iter().filter(|c| c.kind.is_vertex_like() && !under_edge(c)) {
        let Some(geo) = &cell.geometry else { continue };
        let parent = cell.parent.as_deref().and_then(|p| layout.boxes.get(p)).copied();
        let mut rect = match (parent, geo.relative) {
            (Some(p), true) => Rect::new(p.x + geo.x * p.width, p.y + geo.y * p.height, geo.width, geo.height),
            (Some(p), false) => Rect::new(p.x + geo.x, p.y + geo.y, geo.width, geo.height),
            (None, _) => Rect::new(geo.x, geo.y, geo.width, geo.height),
        };
        if let Some(off) = geo.offset {
            rect.x += off.x;
            rect.y += off.y;
        }
        finite(&cell.id, &[rect.x, rect.y, rect.width, rect.height])?;
        layout.boxes.insert(cell.id.clone(), rect);
    }

    for cell in model.cells.iter().filter(|c| c.kind == CellKind::Edge) {
        let route = route_edge(cell, &layout.boxes)?;
        layout.routes.insert(cell.id.clone(), route);
    }

    // Edge labels: geometry x in [-1, 1] runs along the edge, 0 is the middle.
    for cell in model.cells.iter().filter(|c| c.kind.is_vertex_like() && under_edge(c)) {
        let Some(geo) = &cell.geometry else { continue };
        let Some(route) = cell.parent.as_deref().and_then(|p| layout.routes.get(p)) else { continue };
        let t = if geo.relative { (geo.x + 1.0) / 2.0 } else { 0.5 };
        let mut at = route.point_at(t);
        if let Some(off) = geo.offset {
            at = shifted(at, off);
        }
        let rect = Rect::new(at.x - geo.width / 2.0, at.y - geo.height / 2.0, geo.width, geo.height);
        finite(&cell.id, &[rect.x, rect.y, rect.width, rect.height])?;
        layout.boxes.insert(cell.id.clone(), rect);
    }
    Ok(layout)
}

fn finite(cell_id: &str, values: &[f64]) -> Result<(), RenderError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(RenderError::NonFiniteCoordinate { cell_id: cell_id.to_string() })
    }
}

fn route_edge(cell: &Cell, boxes: &HashMap<String, Rect>) -> Result<EdgeRoute, RenderError> {
    let geo = cell.geometry.clone().unwrap_or_default();
    let origin = cell.parent.as_deref().and_then(|p| boxes.get(p)).map(|r| Point::new(r.x, r.y)).unwrap_or(Point::new(0.0, 0.0));
    let waypoints: Vec<Point> = geo.waypoints.iter().map(|p| shifted(*p, origin)).collect();
    let src_box = cell.source.as_deref().and_then(|s| boxes.get(s)).copied();
    let tgt_box = cell.target.as_deref().and_then(|t| boxes.get(t)).copied();
    let src_point = geo.source_point.map(|p| shifted(p, origin));
    let tgt_point = geo.target_point.map(|p| shifted(p, origin));

    let points = if cell.source.is_some() && cell.source == cell.target && waypoints.is_empty() {
        match src_box {
            Some(b) => self_loop(&b),
            None => vec![origin, origin],
        }
    } else {
        // Reference each terminal aims at: nearest waypoint, else the far end.
        let far_src = src_box.map(|b| b.center()).or(src_point);
        let far_tgt = tgt_box.map(|b| b.center()).or(tgt_point);
        let orthogonal = !waypoints.is_empty();
        let start = match (src_box, waypoints.first().copied().or(far_tgt)) {
            (Some(b), Some(toward)) => Some(anchor_toward(&b, toward, orthogonal)),
            (Some(b), None) => Some(b.center()),
            (None, _) => src_point,
        };
        let end = match (tgt_box, waypoints.last().copied().or(far_src)) {
            (Some(b), Some(toward)) => Some(anchor_toward(&b, toward, orthogonal)),
            (Some(b), None) => Some(b.center()),
            (None, _) => tgt_point,
        };
        let mut pts = Vec::with_capacity(waypoints.len() + 2);
        match (start, end) {
            (Some(s), Some(e)) => {
                pts.push(s);
                pts.extend(waypoints);
                pts.push(e);
            }
            (Some(s), None) => {
                pts.push(s);
                if waypoints.is_empty() {
                    pts.push(Point::new(s.x + DETACHED_OFFSET, s.y));
                } else {
                    pts.extend(waypoints);
                }
            }
            (None, Some(e)) => {
                if waypoints.is_empty() {
                    pts.push(Point::new(e.x - DETACHED_OFFSET, e.y));
                } else {
                    pts.extend(waypoints);
                }
                pts.push(e);
            }
            (None, None) => {
                pts.extend(waypoints);
                if pts.is_empty() {
                    pts.push(origin);
                }
                if pts.len() == 1 {
                    let p = pts[0];
                    pts.push(Point::new(p.x + DETACHED_OFFSET, p.y));
                }
            }
        }
        pts
    };
    let flat: Vec<f64> = points.iter().flat_map(|p| [p.x, p.y]).collect();
    finite(&cell.id, &flat)?;
    Ok(EdgeRoute { points })
}

fn self_loop(b: &Rect) -> Vec<Point> {
    let c = b.center();
    vec![
        Point::new(b.right(), c.y),
        Point::new(b.right() + LOOP_REACH, c.y),
        Point::new(b.right() + LOOP_REACH, b.y - LOOP_REACH),
        Point::new(c.x, b.y - LOOP_REACH),
        Point::new(c.x, b.y),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mxgraph::{Geometry, StyleMap};

    fn boxed(id: &str, x: f64, y: f64) -> Cell {
        Cell::vertex(id, id, StyleMap::default(), Geometry::rect(x, y, 100.0, 50.0))
    }

    #[test]
    fn straight_edge_meets_facing_midpoints() {
        let mut m = GraphModel::empty();
        m.cells.push(boxed("a", 0.0, 0.0));
        m.cells.push(boxed("b", 200.0, 0.0));
        m.cells.push(Cell::edge("e", Some("a".into()), Some("b".into()), "", StyleMap::default()));
        let l = layout_model(&m).unwrap();
        assert_eq!(l.routes["e"].points, vec![Point::new(100.0, 25.0), Point::new(200.0, 25.0)]);
    }

    #[test]
    fn waypoint_anchors_are_orthogonal() {
        let r = Rect::new(0.0, 0.0, 100.0, 50.0);
        assert_eq!(anchor_toward(&r, Point::new(30.0, 200.0), true), Point::new(30.0, 50.0));
        assert_eq!(anchor_toward(&r, Point::new(300.0, 10.0), true), Point::new(100.0, 10.0));
        assert_eq!(anchor_toward(&r, Point::new(300.0, 10.0), false), Point::new(100.0, 22.0));
    }

    #[test]
    fn children_are_offset_by_group() {
        let mut m = GraphModel::empty();
        m.cells.push(Cell::vertex("g", "", StyleMap::parse_lossy("group"), Geometry::rect(100.0, 100.0, 300.0, 200.0)));
        m.cells.push(boxed("c", 10.0, 20.0).with_parent("g"));
        let l = layout_model(&m).unwrap();
        assert_eq!(l.boxes["c"], Rect::new(110.0, 120.0, 100.0, 50.0));
    }

    #[test]
    fn route_midpoint() {
        let r = EdgeRoute { points: vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0)] };
        assert_eq!(r.point_at(0.5), Point::new(10.0, 0.0));
        assert_eq!(r.length(), 20.0);
    }
}
