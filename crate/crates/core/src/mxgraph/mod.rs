//! Typed model of the supported mxGraph (draw.io) XML subset.
//!
//! A document is one `<diagram>` holding one `<mxGraphModel>`. Cells keep
//! their document order, which is also the z-order. Attributes outside the
//! modelled subset are carried in `extra` bags so serialization is lossless.

mod build;
pub(crate) mod check;
mod serialize;
mod style;

pub use build::{build_document, BuildError, EdgeSpec, NodeKind, NodeSpec};
pub use serialize::serialize_document;
pub use style::{StyleCatalog, StyleLint, StyleMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{Finding, FindingCode};
use crate::xml::{self, XmlError};

pub const ROOT_ID: &str = "0";
pub const LAYER_ID: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Envelope {
    /// `<mxfile><diagram><mxGraphModel>`
    #[default]
    MxFile,
    /// A bare `<mxGraphModel>` root.
    Bare,
}

/// Document-level attributes (the `mxfile` / `diagram` wrapper).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HostMeta {
    pub envelope: Envelope,
    pub host: Option<String>,
    pub version: Option<String>,
    pub diagram_id: Option<String>,
    pub diagram_name: Option<String>,
    pub mxfile_extra: Vec<(String, String)>,
    pub diagram_extra: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GraphDocument {
    pub meta: HostMeta,
    pub model: GraphModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphModel {
    pub dx: Option<i64>,
    pub dy: Option<i64>,
    pub grid_size: Option<i64>,
    pub page_width: Option<i64>,
    pub page_height: Option<i64>,
    pub extra: Vec<(String, String)>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    /// Root and layer cells: no geometry, never drawn.
    Structural,
    Vertex,
    Edge,
    /// A vertex whose style marks it as a group or container frame.
    Group,
}

impl CellKind {
    pub fn is_vertex_like(self) -> bool {
        matches!(self, CellKind::Vertex | CellKind::Group)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: String,
    pub kind: CellKind,
    pub value: String,
    pub style: StyleMap,
    pub parent: Option<String>,
    pub source: Option<String>,
    pub target: Option<String>,
    pub geometry: Option<Geometry>,
    pub extra: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Geometry {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    pub relative: bool,
    pub waypoints: Vec<Point>,
    pub source_point: Option<Point>,
    pub target_point: Option<Point>,
    pub offset: Option<Point>,
    pub extra: Vec<(String, String)>,
}

impl Geometry {
    pub fn rect(x: f64, y: f64, width: f64, height: f64) -> Self {
        Geometry { x, y, width, height, ..Geometry::default() }
    }

    pub fn edge() -> Self {
        Geometry { relative: true, ..Geometry::default() }
    }
}

impl Cell {
    pub fn root() -> Cell {
        Cell::structural(ROOT_ID, None)
    }

    pub fn layer() -> Cell {
        Cell::structural(LAYER_ID, Some(ROOT_ID))
    }

    fn structural(id: &str, parent: Option<&str>) -> Cell {
        Cell {
            id: id.to_string(),
            kind: CellKind::Structural,
            value: String::new(),
            style: StyleMap::default(),
            parent: parent.map(str::to_string),
            source: None,
            target: None,
            geometry: None,
            extra: Vec::new(),
        }
    }

    pub fn vertex(id: impl Into<String>, value: impl Into<String>, style: StyleMap, geometry: Geometry) -> Cell {
        let kind = if style.is_group_frame() { CellKind::Group } else { CellKind::Vertex };
        Cell {
            id: id.into(),
            kind,
            value: value.into(),
            style,
            parent: Some(LAYER_ID.to_string()),
            source: None,
            target: None,
            geometry: Some(geometry),
            extra: Vec::new(),
        }
    }

    pub fn edge(id: impl Into<String>, source: Option<String>, target: Option<String>, value: impl Into<String>, style: StyleMap) -> Cell {
        Cell {
            id: id.into(),
            kind: CellKind::Edge,
            value: value.into(),
            style,
            parent: Some(LAYER_ID.to_string()),
            source,
            target,
            geometry: Some(Geometry::edge()),
            extra: Vec::new(),
        }
    }

    pub fn with_parent(mut self, parent: impl Into<String>) -> Cell {
        self.parent = Some(parent.into());
        self
    }
}

impl Default for GraphModel {
    fn default() -> Self {
        GraphModel::empty()
    }
}

impl GraphModel {
    /// A model containing only the two structural root cells.
    pub fn empty() -> GraphModel {
        GraphModel {
            dx: None,
            dy: None,
            grid_size: None,
            page_width: None,
            page_height: None,
            extra: Vec::new(),
            cells: vec![Cell::root(), Cell::layer()],
        }
    }

    pub fn cell(&self, id: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.id == id)
    }

    pub fn cell_index(&self, id: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.id == id)
    }

    /// Cells other than the two structural roots.
    pub fn user_cells(&self) -> &[Cell] {
        self.cells.get(2..).unwrap_or(&[])
    }

    pub fn vertices(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.kind.is_vertex_like())
    }

    pub fn edges(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| c.kind == CellKind::Edge)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices().count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }
}

impl GraphDocument {
    pub fn new(model: GraphModel) -> GraphDocument {
        GraphDocument { meta: HostMeta::default(), model }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("not well-formed: {0}")]
    NotWellFormed(XmlError),
    #[error("unsupported root at {path}: {detail}")]
    UnsupportedRoot { path: String, detail: String },
    #[error("duplicate id at {path}: {detail}")]
    DuplicateId { path: String, detail: String },
    #[error("orphan parent at {path}: {detail}")]
    OrphanParent { path: String, detail: String },
    #[error("bad geometry at {path}: {detail}")]
    BadGeometry { path: String, detail: String },
    #[error("dangling endpoint at {path}: {detail}")]
    DanglingEndpoint { path: String, detail: String },
    #[error("{code} at {path}: {detail}")]
    Unsupported { code: FindingCode, path: String, detail: String },
}

impl ParseError {
    fn from_finding(finding: Finding) -> ParseError {
        let Finding { code, location: path, message: detail, .. } = finding;
        match code {
            FindingCode::UnsupportedRoot => ParseError::UnsupportedRoot { path, detail },
            FindingCode::DuplicateId => ParseError::DuplicateId { path, detail },
            FindingCode::OrphanParent | FindingCode::MissingRootCells => ParseError::OrphanParent { path, detail },
            FindingCode::NonNumeric
            | FindingCode::NegativeSize
            | FindingCode::DegenerateSize
            | FindingCode::MissingGeometry
            | FindingCode::WaypointsOnVertex => ParseError::BadGeometry { path, detail },
            FindingCode::DanglingEdge | FindingCode::UnanchoredEdge => ParseError::DanglingEndpoint { path, detail },
            code => ParseError::Unsupported { code, path, detail },
        }
    }
}

/// Parses mxGraph XML into a [`GraphDocument`], rejecting anything that
/// violates the model's invariants.
pub fn parse_document(xml_text: &str) -> Result<GraphDocument, ParseError> {
    let tree = xml::parse_tree(xml_text).map_err(ParseError::NotWellFormed)?;
    let report = check::check_tree(&tree);
    if let Some(err) = report.first_error() {
        return Err(ParseError::from_finding(err.clone()));
    }
    let shape = report.shape.expect("shape is set when no schema errors");
    Ok(check::lower(&tree, &shape))
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_BOXES: &str = include_str!("../../tests/fixtures/valid/01_three_boxes_two_arrows.xml");

    #[test]
    fn empty_document_has_no_user_cells() {
        let xml = r#"<mxfile><diagram id="d" name="Page-1"><mxGraphModel><root>
            <mxCell id="0"/><mxCell id="1" parent="0"/></root></mxGraphModel></diagram></mxfile>"#;
        let doc = parse_document(xml).unwrap();
        assert!(doc.model.user_cells().is_empty());
        assert_eq!(doc.meta.diagram_name.as_deref(), Some("Page-1"));
    }

    #[test]
    fn counts_match_raw_attribute_scan() {
        let doc = parse_document(THREE_BOXES).unwrap();
        let vertex_scan = regex::Regex::new(r#"\svertex="1""#).unwrap().find_iter(THREE_BOXES).count();
        let edge_scan = regex::Regex::new(r#"\sedge="1""#).unwrap().find_iter(THREE_BOXES).count();
        assert_eq!((vertex_scan, edge_scan), (3, 2));
        assert_eq!(doc.model.vertex_count(), vertex_scan);
        assert_eq!(doc.model.edge_count(), edge_scan);
    }

    #[test]
    fn truncated_input_is_not_well_formed() {
        assert!(matches!(parse_document("<mxfile><diagram>"), Err(ParseError::NotWellFormed(_))));
    }

    #[test]
    fn error_variants() {
        let wrap =
            |cells: &str| format!("<mxGraphModel><root><mxCell id=\"0\"/><mxCell id=\"1\" parent=\"0\"/>{cells}</root></mxGraphModel>");
        assert!(matches!(parse_document("<svg/>"), Err(ParseError::UnsupportedRoot { .. })));
        let dup = wrap(
            r#"<mxCell id="a" vertex="1" parent="1"><mxGeometry width="1" height="1" as="geometry"/></mxCell><mxCell id="a" vertex="1" parent="1"><mxGeometry width="1" height="1" as="geometry"/></mxCell>"#,
        );
        assert!(matches!(parse_document(&dup), Err(ParseError::DuplicateId { .. })));
        let orphan = wrap(r#"<mxCell id="a" vertex="1" parent="zz"><mxGeometry width="1" height="1" as="geometry"/></mxCell>"#);
        assert!(matches!(parse_document(&orphan), Err(ParseError::OrphanParent { .. })));
        let bad = wrap(r#"<mxCell id="a" vertex="1" parent="1"><mxGeometry x="ten" width="1" height="1" as="geometry"/></mxCell>"#);
        match parse_document(&bad) {
            Err(ParseError::BadGeometry { path, .. }) => assert!(path.contains("@id='a'")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn keeps_unknown_attributes() {
        let xml = r#"<mxGraphModel dx="800" math="0" pageScale="1.5"><root><mxCell id="0"/><mxCell id="1" parent="0"/>
            <mxCell id="v" value="A" style="rounded=1;" vertex="1" connectable="0" parent="1">
              <mxGeometry x="1.5" y="2" width="10" height="20" as="geometry"/></mxCell></root></mxGraphModel>"#;
        let doc = parse_document(xml).unwrap();
        assert_eq!(doc.meta.envelope, Envelope::Bare);
        assert_eq!(doc.model.dx, Some(800));
        assert_eq!(doc.model.extra, vec![("math".into(), "0".into()), ("pageScale".into(), "1.5".into())]);
        let v = doc.model.cell("v").unwrap();
        assert_eq!(v.extra, vec![("connectable".into(), "0".into())]);
        let back = parse_document(&serialize_document(&doc)).unwrap();
        assert_eq!(back, doc);
    }
}
