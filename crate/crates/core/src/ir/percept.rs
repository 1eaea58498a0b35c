use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{decode, IrError, IR_SCHEMA};

pub(crate) fn schema_tag() -> String {
    IR_SCHEMA.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GestaltPrinciple {
    #[serde(alias = "Proximity")]
    Proximity,
    #[serde(alias = "Similarity")]
    Similarity,
    #[serde(alias = "Continuity")]
    Continuity,
    #[serde(alias = "Closure")]
    Closure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VisualVariable {
    #[serde(alias = "Color", alias = "colour")]
    Color,
    #[serde(alias = "Size")]
    Size,
    #[serde(alias = "Shape")]
    Shape,
    #[serde(alias = "Position")]
    Position,
    #[serde(alias = "Texture")]
    Texture,
}

/// A visual object and the primitives nested inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptNode {
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub primitive: String,
    #[serde(default)]
    pub children: Vec<PerceptNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestaltGroup {
    pub members: Vec<String>,
    pub principle: GestaltPrinciple,
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoding {
    pub visual_variable: VisualVariable,
    #[serde(default)]
    pub semantic_role: String,
    #[serde(default)]
    pub example: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connector {
    pub from: String,
    pub to: String,
    #[serde(default = "yes")]
    pub directed: bool,
    #[serde(default)]
    pub routing_hint: String,
}

fn yes() -> bool {
    true
}

/// Perceptual reading of the input diagram. Every reference names a node
/// of `hierarchy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptReport {
    #[serde(default = "schema_tag")]
    pub schema: String,
    pub hierarchy: Vec<PerceptNode>,
    #[serde(default)]
    pub gestalt_groups: Vec<GestaltGroup>,
    #[serde(default)]
    pub encodings: Vec<Encoding>,
    #[serde(default)]
    pub connectors: Vec<Connector>,
}

impl PerceptReport {
    /// All hierarchy nodes, depth first.
    pub fn nodes(&self) -> Vec<&PerceptNode> {
        fn walk<'a>(nodes: &'a [PerceptNode], out: &mut Vec<&'a PerceptNode>) {
            for n in nodes {
                out.push(n);
                walk(&n.children, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.hierarchy, &mut out);
        out
    }

    pub fn node(&self, id: &str) -> Option<&PerceptNode> {
        self.nodes().into_iter().find(|n| n.id == id)
    }

    pub fn validate(&self) -> Result<(), IrError> {
        let mut ids = HashSet::new();
        for node in self.nodes() {
            if node.id.is_empty() {
                return Err(IrError::schema("hierarchy", "node with empty id"));
            }
            if !ids.insert(node.id.as_str()) {
                return Err(IrError::schema("hierarchy", format!("duplicate id '{}'", node.id)));
            }
        }
        let refs = self.gestalt_groups.iter().flat_map(|g| g.members.iter()).chain(self.connectors.iter().flat_map(|c| [&c.from, &c.to]));
        for r in refs {
            if !ids.contains(r.as_str()) {
                return Err(IrError::DanglingRef(r.clone()));
            }
        }
        Ok(())
    }
}

/// Decodes and validates the perceptual report in a raw model response.
pub fn parse_percept_response(model_text: &str) -> Result<PerceptReport, IrError> {
    let report: PerceptReport = decode(model_text)?;
    report.validate()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_OBJECTS: &str = r#"Here is what I see.
```json
{"schema": "dwt-ir/1",
 "hierarchy": [{"id": "n1", "label": "Encoder", "primitive": "rounded"},
               {"id": "n2", "label": "Decoder", "primitive": "rounded"}],
 "gestalt_groups": [{"members": ["n1", "n2"], "principle": "proximity", "note": "same row"}],
 "encodings": [{"visual_variable": "color", "semantic_role": "module type"}],
 "connectors": [{"from": "n1", "to": "n2", "directed": true}]}
```
That is all."#;

    #[test]
    fn parses_group_over_two_objects() {
        let report = parse_percept_response(TWO_OBJECTS).unwrap();
        assert_eq!(report.gestalt_groups.len(), 1);
        assert_eq!(report.nodes().len(), 2);
    }

    #[test]
    fn dangling_member_is_named() {
        let text = TWO_OBJECTS.replace("[\"n1\", \"n2\"]", "[\"n1\", \"n7\"]");
        assert_eq!(parse_percept_response(&text), Err(IrError::DanglingRef("n7".into())));
    }

    #[test]
    fn unknown_principle_reports_path() {
        let text = TWO_OBJECTS.replace("\"proximity\"", "\"symmetry\"");
        match parse_percept_response(&text) {
            Err(IrError::SchemaViolation { path, .. }) => assert_eq!(path, "gestalt_groups[0].principle"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_schema_tag_is_rejected() {
        let text = TWO_OBJECTS.replace("dwt-ir/1", "dwt-ir/9");
        assert!(matches!(parse_percept_response(&text), Err(IrError::SchemaViolation { .. })));
        assert_eq!(parse_percept_response("no block"), Err(IrError::NoStructuredBlock));
    }
}
