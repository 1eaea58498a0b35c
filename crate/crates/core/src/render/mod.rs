//! Deterministic SVG and PNG rendering of a [`GraphModel`].
//!
//! The renderer backs the verifier's rendering layer and produces the
//! images the evaluation harness compares.

mod layout;
mod raster;
mod svg;
mod text;

pub use layout::{anchor_toward, layout_model, EdgeRoute, ModelLayout, Rect};
pub use raster::{rasterize, RasterError};
pub use svg::render_svg;
pub use text::{strip_markup, wrap_label};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mxgraph::{Cell, CellKind, GraphModel};

/// Shapes the renderer can draw. Anything else is a render error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShapeKind {
    Rectangle,
    Rounded,
    Ellipse,
    Rhombus,
    Triangle,
    Hexagon,
    Cylinder,
    Parallelogram,
    Text,
    GroupFrame,
}

impl ShapeKind {
    pub const TOKENS: &'static [&'static str] =
        &["rectangle", "rounded", "ellipse", "rhombus", "triangle", "hexagon", "cylinder", "parallelogram", "text", "group"];

    /// Maps a style shape token (including the common draw.io aliases) to a
    /// supported shape.
    pub fn from_token(token: &str) -> Option<ShapeKind> {
        Some(match token {
            "rectangle" | "rect" | "label" => ShapeKind::Rectangle,
            "rounded" => ShapeKind::Rounded,
            "ellipse" => ShapeKind::Ellipse,
            "rhombus" => ShapeKind::Rhombus,
            "triangle" => ShapeKind::Triangle,
            "hexagon" => ShapeKind::Hexagon,
            "cylinder" | "cylinder3" => ShapeKind::Cylinder,
            "parallelogram" => ShapeKind::Parallelogram,
            "text" | "edgeLabel" => ShapeKind::Text,
            "group" | "swimlane" => ShapeKind::GroupFrame,
            _ => return None,
        })
    }

    /// Shape for a vertex-like cell; `None` for edges and structural cells.
    pub fn for_cell(cell: &Cell) -> Result<Option<ShapeKind>, RenderError> {
        match cell.kind {
            CellKind::Group => Ok(Some(ShapeKind::GroupFrame)),
            CellKind::Vertex => {
                let token = cell.style.shape_token();
                ShapeKind::from_token(token)
                    .map(Some)
                    .ok_or_else(|| RenderError::UnknownShapeToken { cell_id: cell.id.clone(), token: token.to_string() })
            }
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const WHITE: Rgb = Rgb(255, 255, 255);

    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    pub fn parse(text: &str) -> Option<Rgb> {
        let hex = text.strip_prefix('#')?;
        if hex.len() != 6 {
            return None;
        }
        let v = u32::from_str_radix(hex, 16).ok()?;
        Some(Rgb((v >> 16) as u8, (v >> 8) as u8, v as u8))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FontSpec {
    pub family: String,
    /// Sizes tried in order until a label fits its box.
    pub ladder: Vec<f64>,
}

impl Default for FontSpec {
    fn default() -> Self {
        FontSpec { family: "Helvetica, Arial, sans-serif".to_string(), ladder: vec![12.0, 11.0, 10.0, 9.0, 8.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub scale: f64,
    pub background: Rgb,
    pub padding: f64,
    pub font: FontSpec,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { scale: 1.0, background: Rgb::WHITE, padding: 10.0, font: FontSpec::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("cell '{cell_id}' uses unsupported shape '{token}'")]
    UnknownShapeToken { cell_id: String, token: String },
    #[error("cell '{cell_id}' has a non-finite coordinate")]
    NonFiniteCoordinate { cell_id: String },
    #[error("invalid render options: {0}")]
    InvalidOptions(String),
}

/// Checks that every cell of `model` can be drawn.
pub fn check_renderable(model: &GraphModel) -> Result<(), RenderError> {
    for cell in &model.cells {
        ShapeKind::for_cell(cell)?;
    }
    layout_model(model).map(|_| ())
}
