//! Stage-one intermediate representations: the perceptual report and the
//! semantic layout plan, their JSON schema, and the deterministic skeleton
//! realization of a plan.

mod percept;
mod plan;
mod skeleton;

pub use percept::{
    parse_percept_response, Connector, Encoding, GestaltGroup, GestaltPrinciple, PerceptNode, PerceptReport, VisualVariable,
};
pub use plan::{
    class_default_style, parse_layout_response, Axis, Constraint, Element, ElementClass, IrWarning, LayoutPlan, ParsedLayout, Region,
};
pub use skeleton::{plan_to_skeleton, SKELETON_GAP, SKELETON_HEIGHT, SKELETON_WIDTH};

use serde::de::DeserializeOwned;
use thiserror::Error;

use crate::fence::{fenced_blocks, scan_json_object};

/// Value of the optional `schema` field in IR files.
pub const IR_SCHEMA: &str = "dwt-ir/1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IrError {
    #[error("response contains no structured JSON block")]
    NoStructuredBlock,
    #[error("schema violation at {path}: {detail}")]
    SchemaViolation { path: String, detail: String },
    #[error("reference to undeclared id '{0}'")]
    DanglingRef(String),
    #[error("element refers to undeclared region '{0}'")]
    MissingRegion(String),
    #[error("align constraints are unsatisfiable along cycle {}", .cycle.join(" -> "))]
    UnsatisfiableConstraint { cycle: Vec<String> },
}

impl IrError {
    pub(crate) fn schema(path: impl Into<String>, detail: impl Into<String>) -> IrError {
        IrError::SchemaViolation { path: path.into(), detail: detail.into() }
    }
}

/// The JSON payload of a response: the first `json` fence that parses, else
/// the first fence whose body is a JSON object, else the first balanced
/// object anywhere in the text.
pub fn extract_json_block(text: &str) -> Option<&str> {
    let fences = fenced_blocks(text);
    let parses = |body: &str| serde_json::from_str::<serde_json::Value>(body).map(|v| v.is_object()).unwrap_or(false);
    fences
        .iter()
        .find(|f| f.info.eq_ignore_ascii_case("json") && parses(f.body))
        .or_else(|| fences.iter().find(|f| parses(f.body)))
        .map(|f| f.body)
        .or_else(|| fences.iter().find_map(|f| scan_json_object(f.body)))
        .or_else(|| scan_json_object(text))
}

pub(crate) fn decode<T: DeserializeOwned>(text: &str) -> Result<T, IrError> {
    let block = extract_json_block(text).ok_or(IrError::NoStructuredBlock)?;
    let value: serde_json::Value = serde_json::from_str(block).map_err(|e| IrError::schema("$", e.to_string()))?;
    if let Some(schema) = value.get("schema") {
        if schema.as_str() != Some(IR_SCHEMA) {
            return Err(IrError::schema("schema", format!("expected \"{IR_SCHEMA}\", found {schema}")));
        }
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        IrError::schema(if path.is_empty() { "$".to_string() } else { path }, e.into_inner().to_string())
    })
}
