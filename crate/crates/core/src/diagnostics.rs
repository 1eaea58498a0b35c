//! Closed finding taxonomy shared by the document checks and the verifier.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Verification layers, in the order they run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Wellformed,
    Schema,
    References,
    Geometry,
    Render,
}

impl Layer {
    pub const ALL: [Layer; 5] = [Layer::Wellformed, Layer::Schema, Layer::References, Layer::Geometry, Layer::Render];
}

macro_rules! finding_codes {
    ($( $variant:ident => $code:literal, $sev:ident, $layer:ident, $hint:literal; )*) => {
        /// Every code a verdict can carry. Codes are stable identifiers and
        /// appear verbatim in JSON output and refinement feedback.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum FindingCode {
            $( #[serde(rename = $code)] $variant, )*
        }

        impl FindingCode {
            pub const ALL: &'static [FindingCode] = &[$( FindingCode::$variant, )*];

            pub fn as_str(self) -> &'static str {
                match self { $( FindingCode::$variant => $code, )* }
            }

            pub fn severity(self) -> Severity {
                match self { $( FindingCode::$variant => Severity::$sev, )* }
            }

            pub fn layer(self) -> Layer {
                match self { $( FindingCode::$variant => Layer::$layer, )* }
            }

            /// Short repair instruction used in refinement feedback.
            pub fn repair_hint(self) -> &'static str {
                match self { $( FindingCode::$variant => $hint, )* }
            }
        }
    };
}

finding_codes! {
    XmlSyntax => "E_XML_SYNTAX", Error, Wellformed,
        "Fix the XML syntax: quote every attribute value, escape <, & and \" inside values, and keep a single root element.";
    UnclosedTag => "E_UNCLOSED_TAG", Error, Wellformed,
        "Close the element (use <tag/> for empty elements or add the matching </tag>).";
    BadNesting => "E_BAD_NESTING", Error, Wellformed,
        "Close child elements before their parents; end tags must mirror start tags in reverse order.";
    UnsupportedRoot => "E_UNSUPPORTED_ROOT", Error, Schema,
        "Wrap the diagram as <mxfile><diagram><mxGraphModel><root>...</root></mxGraphModel></diagram></mxfile>.";
    MultiPage => "E_MULTI_PAGE", Error, Schema,
        "Emit exactly one <diagram> element.";
    UnexpectedElement => "E_UNEXPECTED_ELEMENT", Error, Schema,
        "Only mxCell elements may appear under <root>, each with at most one <mxGeometry as=\"geometry\"> child; store the model uncompressed.";
    MissingId => "E_MISSING_ID", Error, Schema,
        "Give every mxCell a non-empty id attribute.";
    ConflictingKind => "E_CONFLICTING_KIND", Error, Schema,
        "A cell is either vertex=\"1\" or edge=\"1\", never both.";
    MissingRootCells => "E_MISSING_ROOT_CELLS", Error, References,
        "Start <root> with <mxCell id=\"0\"/> followed by <mxCell id=\"1\" parent=\"0\"/>.";
    DuplicateId => "E_DUPLICATE_ID", Error, References,
        "Rename the repeated cell so every id is unique, and update edges that point to it.";
    OrphanParent => "E_ORPHAN_PARENT", Error, References,
        "Set parent to a cell declared earlier in the document (normally \"1\").";
    DanglingEdge => "E_DANGLING_EDGE", Error, References,
        "Point source/target at an existing vertex id, or remove the edge.";
    UnanchoredEdge => "E_UNANCHORED_EDGE", Error, References,
        "Give the edge a source, a target, or explicit sourcePoint/targetPoint geometry.";
    MissingGeometry => "E_MISSING_GEOMETRY", Error, Geometry,
        "Add <mxGeometry x=\"..\" y=\"..\" width=\"..\" height=\"..\" as=\"geometry\"/> to the vertex.";
    NonNumeric => "E_NON_NUMERIC", Error, Geometry,
        "Use plain finite numbers for x, y, width and height.";
    NegativeSize => "E_NEGATIVE_SIZE", Error, Geometry,
        "Use non-negative width and height.";
    DegenerateSize => "E_DEGENERATE_SIZE", Error, Geometry,
        "Give the vertex a width and height greater than zero.";
    WaypointsOnVertex => "E_WAYPOINTS_ON_VERTEX", Error, Geometry,
        "Routing points belong to edges only; remove the <Array as=\"points\"> from the vertex.";
    UnknownShape => "E_UNKNOWN_SHAPE", Error, Render,
        "Use one of: rectangle, rounded, ellipse, rhombus, triangle, hexagon, cylinder, parallelogram, text, group.";
    RenderFailed => "E_RENDER_FAILED", Error, Render,
        "Check the cell's coordinates and style values.";
    Overlap => "W_OVERLAP", Warning, Geometry,
        "Move one of the overlapping vertices apart.";
    DuplicateStyleKey => "W_DUPLICATE_STYLE_KEY", Warning, Schema,
        "Keep each style key once; the last value wins.";
    IgnoredElement => "W_IGNORED_ELEMENT", Warning, Schema,
        "Remove elements outside the supported mxGraph subset.";
    SelfLoop => "W_SELF_LOOP", Warning, References,
        "Check that the edge really starts and ends at the same vertex.";
    EmptyLabel => "W_EMPTY_EDGE_LABEL_CELL", Warning, Geometry,
        "Remove label cells that carry no text.";
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    /// Element path of the offending node, e.g. `/mxfile/diagram/mxGraphModel/root/mxCell[@id='e1']`.
    pub location: String,
    pub message: String,
}

impl Finding {
    pub fn new(code: FindingCode, location: impl Into<String>, message: impl Into<String>) -> Self {
        Finding { severity: code.severity(), code, location: location.into(), message: message.into() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn taxonomy_is_closed_and_unique() {
        let names: HashSet<_> = FindingCode::ALL.iter().map(|c| c.as_str()).collect();
        assert_eq!(names.len(), FindingCode::ALL.len());
        let errors = FindingCode::ALL.iter().filter(|c| c.severity() == Severity::Error).count();
        let warnings = FindingCode::ALL.len() - errors;
        assert!(errors >= 8 && warnings >= 4);
        for code in FindingCode::ALL {
            let prefix = if code.severity() == Severity::Error { "E_" } else { "W_" };
            assert!(code.as_str().starts_with(prefix));
        }
    }

    #[test]
    fn codes_serialize_as_identifiers() {
        let json = serde_json::to_string(&FindingCode::DanglingEdge).unwrap();
        assert_eq!(json, "\"E_DANGLING_EDGE\"");
    }
}
