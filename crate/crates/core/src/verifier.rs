//! Layered validity gate for candidate XML.
//!
//! Layers run in [`Layer::ALL`] order. A layer that produces an error stops
//! the layers after it, which are reported as skipped.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::{Finding, FindingCode, Layer, Severity};
use crate::mxgraph::check::{self, DocShape};
use crate::render::{check_renderable, RenderError};
use crate::xml::{self, XmlErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerOutcome {
    Passed,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub findings: Vec<Finding>,
    pub checked_layers: BTreeMap<Layer, LayerOutcome>,
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        self.status == Status::Valid
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn codes(&self) -> Vec<FindingCode> {
        self.findings.iter().map(|f| f.code).collect()
    }
}

fn outcome(findings: &[Finding]) -> LayerOutcome {
    if findings.iter().any(|f| f.severity == Severity::Error) {
        LayerOutcome::Failed
    } else {
        LayerOutcome::Passed
    }
}

/// Checks `xml_text` against the supported mxGraph subset. Total: every
/// failure is a finding.
pub fn verify(xml_text: &str) -> Verdict {
    let mut layers: BTreeMap<Layer, LayerOutcome> = Layer::ALL.iter().map(|l| (*l, LayerOutcome::Skipped)).collect();
    let mut findings = Vec::new();

    let tree = match xml::parse_tree(xml_text) {
        Ok(tree) => tree,
        Err(err) => {
            let code = match err.kind {
                XmlErrorKind::Syntax(_) => FindingCode::XmlSyntax,
                XmlErrorKind::Unclosed { .. } => FindingCode::UnclosedTag,
                XmlErrorKind::BadNesting { .. } => FindingCode::BadNesting,
            };
            findings.push(Finding::new(code, format!("byte {}", err.offset), err.to_string()));
            layers.insert(Layer::Wellformed, LayerOutcome::Failed);
            return finish(findings, layers);
        }
    };
    layers.insert(Layer::Wellformed, LayerOutcome::Passed);

    let report = check::check_tree(&tree);
    let staged = [
        (Layer::Schema, Some(&report.schema)),
        (Layer::References, report.references.as_ref()),
        (Layer::Geometry, report.geometry.as_ref()),
    ];
    for (layer, result) in staged {
        let Some(layer_findings) = result else { return finish(findings, layers) };
        let state = outcome(layer_findings);
        findings.extend(layer_findings.iter().cloned());
        layers.insert(layer, state);
        if state == LayerOutcome::Failed {
            return finish(findings, layers);
        }
    }

    let shape = report.shape.as_ref().expect("schema layer passed");
    let doc = check::lower(&tree, shape);
    let render_findings = match check_renderable(&doc.model) {
        Ok(()) => Vec::new(),
        Err(err) => vec![render_finding(shape, &err)],
    };
    layers.insert(Layer::Render, outcome(&render_findings));
    findings.extend(render_findings);
    finish(findings, layers)
}

fn render_finding(shape: &DocShape<'_>, err: &RenderError) -> Finding {
    let path_of = |id: &str| shape.cells.iter().find(|c| c.id == id).map(|c| c.path.clone()).unwrap_or_default();
    match err {
        RenderError::UnknownShapeToken { cell_id, .. } => Finding::new(FindingCode::UnknownShape, path_of(cell_id), err.to_string()),
        RenderError::NonFiniteCoordinate { cell_id } => Finding::new(FindingCode::RenderFailed, path_of(cell_id), err.to_string()),
        RenderError::InvalidOptions(_) => Finding::new(FindingCode::RenderFailed, String::new(), err.to_string()),
    }
}

fn finish(findings: Vec<Finding>, checked_layers: BTreeMap<Layer, LayerOutcome>) -> Verdict {
    let status = if findings.iter().any(|f| f.severity == Severity::Error) { Status::Invalid } else { Status::Valid };
    Verdict { status, findings, checked_layers }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedbackError {
    #[error("feedback requested for a valid verdict")]
    InvalidPrecondition,
}

/// Exemplars listed per finding code before the remainder is summarised.
pub const FEEDBACK_EXEMPLARS: usize = 10;
const MESSAGE_CAP: usize = 240;

/// Renders an invalid verdict as refinement feedback: errors before
/// warnings, one bullet per code with its repair hint, at most
/// [`FEEDBACK_EXEMPLARS`] located examples per code.
pub fn findings_to_feedback(verdict: &Verdict) -> Result<String, FeedbackError> {
    if verdict.is_valid() {
        return Err(FeedbackError::InvalidPrecondition);
    }
    let mut groups: BTreeMap<(Severity, FindingCode), Vec<&Finding>> = BTreeMap::new();
    for f in &verdict.findings {
        groups.entry((f.severity, f.code)).or_default().push(f);
    }
    let mut out = String::from("The XML failed verification. Fix every issue below and return the complete corrected document.\n");
    let mut current = None;
    for ((severity, code), items) in &groups {
        if current != Some(*severity) {
            out.push_str(match severity {
                Severity::Error => "\nErrors:\n",
                Severity::Warning => "\nWarnings:\n",
            });
            current = Some(*severity);
        }
        let _ = writeln!(out, "- {code} ({}): {}", items.len(), code.repair_hint());
        for f in items.iter().take(FEEDBACK_EXEMPLARS) {
            let _ = writeln!(out, "  * {}: {}", clip(&f.location), clip(&f.message));
        }
        if items.len() > FEEDBACK_EXEMPLARS {
            let _ = writeln!(out, "  * ... and {} more", items.len() - FEEDBACK_EXEMPLARS);
        }
    }
    Ok(out)
}

fn clip(text: &str) -> String {
    if text.chars().count() <= MESSAGE_CAP {
        return text.to_string();
    }
    let mut s: String = text.chars().take(MESSAGE_CAP).collect();
    s.push_str("...");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const EMPTY: &str =
        "<mxfile><diagram><mxGraphModel><root><mxCell id=\"0\"/><mxCell id=\"1\" parent=\"0\"/></root></mxGraphModel></diagram></mxfile>";

    #[test]
    fn empty_document_is_valid() {
        let v = verify(EMPTY);
        assert!(v.is_valid());
        assert!(v.findings.is_empty());
        assert!(v.checked_layers.values().all(|o| *o == LayerOutcome::Passed));
    }

    #[test]
    fn unclosed_cell_skips_later_layers() {
        let v = verify("<mxfile><diagram><mxGraphModel><root><mxCell id=\"0\"></root></mxGraphModel></diagram></mxfile>");
        assert_eq!(v.codes(), vec![FindingCode::UnclosedTag]);
        assert_eq!(v.checked_layers[&Layer::Wellformed], LayerOutcome::Failed);
        for layer in &Layer::ALL[1..] {
            assert_eq!(v.checked_layers[layer], LayerOutcome::Skipped);
        }
    }

    #[test]
    fn feedback_refuses_valid_verdicts() {
        assert_eq!(findings_to_feedback(&verify(EMPTY)), Err(FeedbackError::InvalidPrecondition));
    }

    #[test]
    fn feedback_caps_exemplars() {
        let findings: Vec<Finding> =
            (0..40).map(|i| Finding::new(FindingCode::DuplicateId, format!("/c[{i}]"), format!("dup {i}"))).collect();
        let verdict = finish(findings, BTreeMap::new());
        let text = findings_to_feedback(&verdict).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("  * /c[")).count(), FEEDBACK_EXEMPLARS);
        assert!(text.contains("- E_DUPLICATE_ID (40)"));
        assert!(text.contains("... and 30 more"));
    }
}
