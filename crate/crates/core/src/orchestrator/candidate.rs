//! Pulling candidate XML out of a code-generation response.
//!
//! A response may carry the document as an `xml` fence, as bare XML in the
//! prose, or as five tagged JSON fences (`y_doc`, `y_style`, `y_node`,
//! `y_layout`, `y_edge`) that are assembled with [`build_document`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fence::{fenced_blocks, Fence};
use crate::mxgraph::{build_document, serialize_document, EdgeSpec, NodeKind, NodeSpec, StyleCatalog, StyleMap};
use crate::xml::looks_truncated;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    XmlFence,
    RawXml,
    FiveBlocks,
    /// Nothing recognisable; the whole response is the candidate.
    Unstructured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub xml: String,
    pub source: CandidateSource,
    /// Why a five-block response could not be assembled.
    pub assembly_error: Option<String>,
}

const BLOCK_TAGS: [&str; 5] = ["y_doc", "y_style", "y_node", "y_layout", "y_edge"];

fn tagged<'a>(fences: &'a [Fence<'a>], tag: &str) -> Option<&'a Fence<'a>> {
    fences.iter().find(|f| f.info.split_whitespace().any(|w| w.eq_ignore_ascii_case(tag)))
}

fn is_xml_info(info: &str) -> bool {
    matches!(info.split_whitespace().next().map(str::to_ascii_lowercase).as_deref(), Some("xml" | "drawio" | "mxgraph"))
}

/// Start of an inline document, i.e. `<mxfile` or `<mxGraphModel`.
fn inline_xml(text: &str) -> Option<&str> {
    let start = ["<mxfile", "<mxGraphModel"].iter().filter_map(|t| text.find(t)).min()?;
    let body = &text[start..];
    let close = if body.starts_with("<mxfile") { "</mxfile>" } else { "</mxGraphModel>" };
    Some(match body.find(close) {
        Some(end) => &body[..end + close.len()],
        None => body.trim_end().trim_end_matches('`').trim_end(),
    })
}

pub fn extract_candidate(response: &str) -> Candidate {
    let fences = fenced_blocks(response);
    if BLOCK_TAGS.iter().filter(|t| tagged(&fences, t).is_some()).count() >= 2 && tagged(&fences, "y_node").is_some() {
        return match assemble_blocks(&fences) {
            Ok(xml) => Candidate { xml, source: CandidateSource::FiveBlocks, assembly_error: None },
            Err(e) => Candidate { xml: String::new(), source: CandidateSource::FiveBlocks, assembly_error: Some(e) },
        };
    }
    let fence = fences.iter().find(|f| is_xml_info(f.info)).or_else(|| fences.iter().find(|f| f.body.trim_start().starts_with('<')));
    if let Some(f) = fence {
        return Candidate { xml: f.body.trim().to_string(), source: CandidateSource::XmlFence, assembly_error: None };
    }
    if let Some(xml) = inline_xml(response) {
        return Candidate { xml: xml.to_string(), source: CandidateSource::RawXml, assembly_error: None };
    }
    Candidate { xml: response.trim().to_string(), source: CandidateSource::Unstructured, assembly_error: None }
}

/// True when the response seems cut off by the length limit: an open fence,
/// or a document whose outermost element never closes.
pub fn response_truncated(response: &str) -> bool {
    let fences = fenced_blocks(response);
    if fences.last().is_some_and(|f| !f.closed) {
        return true;
    }
    let candidate = extract_candidate(response);
    if candidate.source == CandidateSource::FiveBlocks {
        return false;
    }
    let xml = candidate.xml.trim();
    let open_root = (xml.starts_with("<mxfile") && !xml.contains("</mxfile>"))
        || (xml.starts_with("<mxGraphModel") && !xml.contains("</mxGraphModel>"));
    open_root || looks_truncated(xml)
}

/// Joins a continuation onto the text so far, dropping a fence opener the
/// model may repeat at the start of the continuation.
pub fn join_continuation(so_far: &str, continuation: &str) -> String {
    let mut next = continuation;
    let trimmed = next.trim_start();
    if let Some(rest) = trimmed.strip_prefix("```") {
        if fenced_blocks(so_far).last().is_some_and(|f| !f.closed) {
            next = rest.split_once('\n').map(|(_, body)| body).unwrap_or("");
        }
    }
    format!("{so_far}{next}")
}

#[derive(Debug, Default, Deserialize)]
struct DocBlock {
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    page_width: Option<i64>,
    #[serde(default)]
    page_height: Option<i64>,
    #[serde(default)]
    grid_size: Option<i64>,
}

#[derive(Debug, Deserialize)]
struct NodeBlock {
    id: String,
    #[serde(default)]
    value: String,
    #[serde(default)]
    kind: NodeKind,
    #[serde(default)]
    style_role: Option<String>,
    #[serde(default)]
    parent: Option<String>,
    // Coordinates may be given here or in y_layout.
    x: Option<f64>,
    y: Option<f64>,
    width: Option<f64>,
    height: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
struct Bounds {
    x: f64,
    y: f64,
    width: f64,
    height: f64,
}

#[derive(Debug, Deserialize)]
struct LayoutEntry {
    id: String,
    #[serde(flatten)]
    bounds: Bounds,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LayoutBlock {
    List(Vec<LayoutEntry>),
    Map(BTreeMap<String, Bounds>),
}

fn parse_block<T: serde::de::DeserializeOwned>(fences: &[Fence<'_>], tag: &str) -> Result<Option<T>, String> {
    let Some(f) = tagged(fences, tag) else { return Ok(None) };
    let de = &mut serde_json::Deserializer::from_str(f.body);
    serde_path_to_error::deserialize(de).map(Some).map_err(|e| format!("{tag} block at {}: {}", e.path(), e.inner()))
}

fn assemble_blocks(fences: &[Fence<'_>]) -> Result<String, String> {
    let doc: DocBlock = parse_block(fences, "y_doc")?.unwrap_or_default();
    let styles: BTreeMap<String, String> = parse_block(fences, "y_style")?.unwrap_or_default();
    let nodes: Vec<NodeBlock> = parse_block(fences, "y_node")?.unwrap_or_default();
    let layout: BTreeMap<String, Bounds> = match parse_block::<LayoutBlock>(fences, "y_layout")? {
        None => BTreeMap::new(),
        Some(LayoutBlock::Map(m)) => m,
        Some(LayoutBlock::List(list)) => list.into_iter().map(|e| (e.id, e.bounds)).collect(),
    };
    let edges: Vec<EdgeSpec> = parse_block(fences, "y_edge")?.unwrap_or_default();

    let mut catalog = StyleCatalog::new();
    for (role, style) in styles {
        catalog.insert(role, StyleMap::parse_lossy(&style));
    }
    let specs = nodes
        .into_iter()
        .map(|n| {
            let inline = match (n.x, n.y, n.width, n.height) {
                (Some(x), Some(y), Some(width), Some(height)) => Some(Bounds { x, y, width, height }),
                _ => None,
            };
            let b = layout.get(&n.id).copied().or(inline).ok_or_else(|| format!("node '{}' has no geometry in y_layout", n.id))?;
            Ok(NodeSpec {
                id: n.id,
                value: n.value,
                kind: n.kind,
                style_role: n.style_role,
                x: b.x,
                y: b.y,
                width: b.width,
                height: b.height,
                parent: n.parent,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let mut built = build_document(&specs, &edges, &catalog).map_err(|e| e.to_string())?;
    built.meta.diagram_name = doc.name;
    built.model.page_width = doc.page_width;
    built.model.page_height = doc.page_height;
    built.model.grid_size = doc.grid_size;
    Ok(serialize_document(&built))
}
