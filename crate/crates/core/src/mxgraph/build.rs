//! Programmatic assembly of a document from node and edge specs.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Cell, Geometry, GraphDocument, GraphModel, Point, StyleCatalog, StyleMap, LAYER_ID, ROOT_ID};
use crate::render::ShapeKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    #[default]
    Vertex,
    Group,
}

/// A vertex or group frame. Coordinates are relative to `parent`, or to the
/// page when there is none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    #[serde(default)]
    pub value: String,
    #[serde(default)]
    pub kind: NodeKind,
    #[serde(default)]
    pub style_role: Option<String>,
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub parent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub value: String,
    #[serde(default)]
    pub style_role: Option<String>,
    #[serde(default)]
    pub waypoints: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BuildError {
    #[error("edge '{edge}' references unknown node '{missing}'")]
    DanglingEndpoint { edge: String, missing: String },
    #[error("id '{0}' is used more than once or is reserved")]
    DuplicateId(String),
    #[error("id must not be empty")]
    EmptyId,
    #[error("'{id}' uses unknown style role '{role}'")]
    UnknownStyleRole { id: String, role: String },
    #[error("'{id}' uses unsupported shape '{token}'")]
    UnknownShape { id: String, token: String },
    #[error("'{id}' has invalid geometry: {detail}")]
    BadGeometry { id: String, detail: String },
    #[error("node '{id}' has parent '{parent}' which is not a node or forms a cycle")]
    OrphanParent { id: String, parent: String },
}

fn resolve_style(id: &str, role: Option<&str>, styles: &StyleCatalog) -> Result<StyleMap, BuildError> {
    match role {
        None => Ok(StyleMap::default()),
        Some(role) => styles.get(role).cloned().ok_or_else(|| BuildError::UnknownStyleRole { id: id.to_string(), role: role.to_string() }),
    }
}

/// Assembles a document whose cells are the two structural roots, then the
/// nodes (parents before children, otherwise in input order), then the edges.
///
/// Any document returned here verifies as valid.
pub fn build_document(nodes: &[NodeSpec], edges: &[EdgeSpec], styles: &StyleCatalog) -> Result<GraphDocument, BuildError> {
    let mut seen: HashSet<&str> = HashSet::from([ROOT_ID, LAYER_ID]);
    for id in nodes.iter().map(|n| n.id.as_str()).chain(edges.iter().map(|e| e.id.as_str())) {
        if id.is_empty() {
            return Err(BuildError::EmptyId);
        }
        if !seen.insert(id) {
            return Err(BuildError::DuplicateId(id.to_string()));
        }
    }
    let node_ids: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();

    let mut node_cells = Vec::with_capacity(nodes.len());
    for node in nodes {
        let values = [node.x, node.y, node.width, node.height];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(BuildError::BadGeometry { id: node.id.clone(), detail: "non-finite coordinate".into() });
        }
        if node.width <= 0.0 || node.height <= 0.0 {
            return Err(BuildError::BadGeometry { id: node.id.clone(), detail: "width and height must be positive".into() });
        }
        let mut style = resolve_style(&node.id, node.style_role.as_deref(), styles)?;
        if node.kind == NodeKind::Group && !style.is_group_frame() {
            style.set("container", "1");
        }
        let mut cell = Cell::vertex(node.id.clone(), node.value.clone(), style, Geometry::rect(node.x, node.y, node.width, node.height));
        if let Err(crate::render::RenderError::UnknownShapeToken { token, .. }) = ShapeKind::for_cell(&cell) {
            return Err(BuildError::UnknownShape { id: node.id.clone(), token });
        }
        if let Some(parent) = &node.parent {
            if !node_ids.contains_key(parent.as_str()) {
                return Err(BuildError::OrphanParent { id: node.id.clone(), parent: parent.clone() });
            }
            cell.parent = Some(parent.clone());
        }
        node_cells.push(cell);
    }

    // Stable topological order: a node is emitted once its parent has been.
    let mut model = GraphModel::empty();
    let mut emitted = vec![false; nodes.len()];
    let mut remaining = nodes.len();
    while remaining > 0 {
        let mut progressed = false;
        for (i, node) in nodes.iter().enumerate() {
            let ready = node.parent.as_deref().is_none_or(|p| emitted[node_ids[p]]);
            if !emitted[i] && ready {
                emitted[i] = true;
                remaining -= 1;
                progressed = true;
                model.cells.push(node_cells[i].clone());
            }
        }
        if !progressed {
            let stuck = nodes.iter().enumerate().find(|(i, _)| !emitted[*i]).map(|(_, n)| n).expect("remaining > 0");
            return Err(BuildError::OrphanParent { id: stuck.id.clone(), parent: stuck.parent.clone().unwrap_or_default() });
        }
    }

    for edge in edges {
        for end in [&edge.source, &edge.target] {
            if !node_ids.contains_key(end.as_str()) {
                return Err(BuildError::DanglingEndpoint { edge: edge.id.clone(), missing: end.clone() });
            }
        }
        if edge.waypoints.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(BuildError::BadGeometry { id: edge.id.clone(), detail: "non-finite waypoint".into() });
        }
        let style = resolve_style(&edge.id, edge.style_role.as_deref(), styles)?;
        let mut cell = Cell::edge(edge.id.clone(), Some(edge.source.clone()), Some(edge.target.clone()), edge.value.clone(), style);
        if let Some(geo) = cell.geometry.as_mut() {
            geo.waypoints = edge.waypoints.clone();
        }
        model.cells.push(cell);
    }
    Ok(GraphDocument::new(model))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: &str, x: f64) -> NodeSpec {
        NodeSpec {
            id: id.into(),
            value: id.into(),
            kind: NodeKind::Vertex,
            style_role: None,
            x,
            y: 0.0,
            width: 100.0,
            height: 50.0,
            parent: None,
        }
    }

    fn edge(id: &str, s: &str, t: &str) -> EdgeSpec {
        EdgeSpec { id: id.into(), source: s.into(), target: t.into(), value: String::new(), style_role: None, waypoints: vec![] }
    }

    #[test]
    fn empty_build_is_skeleton() {
        let doc = build_document(&[], &[], &StyleCatalog::new()).unwrap();
        assert_eq!(doc, GraphDocument::new(GraphModel::empty()));
    }

    #[test]
    fn rejects_dangling_and_duplicates() {
        let styles = StyleCatalog::new();
        assert_eq!(
            build_document(&[node("A", 0.0)], &[edge("e", "A", "Z")], &styles),
            Err(BuildError::DanglingEndpoint { edge: "e".into(), missing: "Z".into() })
        );
        assert_eq!(build_document(&[node("A", 0.0), node("A", 1.0)], &[], &styles), Err(BuildError::DuplicateId("A".into())));
        assert_eq!(build_document(&[node("1", 0.0)], &[], &styles), Err(BuildError::DuplicateId("1".into())));
    }

    #[test]
    fn children_follow_parents() {
        let mut child = node("c", 10.0);
        child.parent = Some("g".into());
        let mut group = node("g", 0.0);
        group.kind = NodeKind::Group;
        let doc = build_document(&[child, group], &[], &StyleCatalog::new()).unwrap();
        let ids: Vec<&str> = doc.model.user_cells().iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, vec!["g", "c"]);
        assert_eq!(doc.model.cells[2].kind, super::super::CellKind::Group);
    }

    #[test]
    fn unknown_role_and_shape() {
        let mut n = node("A", 0.0);
        n.style_role = Some("fancy".into());
        assert!(matches!(build_document(&[n.clone()], &[], &StyleCatalog::new()), Err(BuildError::UnknownStyleRole { .. })));
        let mut styles = StyleCatalog::new();
        styles.insert("fancy", StyleMap::parse_lossy("shape=cloud;"));
        assert!(matches!(build_document(&[n], &[], &styles), Err(BuildError::UnknownShape { .. })));
    }
}
