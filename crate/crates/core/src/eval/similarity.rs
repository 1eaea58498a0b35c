//! Structural similarity between two parsed diagrams.
//!
//! Nodes are paired by a maximum-weight assignment where a pair weighs
//! `0.5 label + 0.25 shape + 0.25 (1 - distance)` and only pairs weighing at
//! least [`MATCH_THRESHOLD`] may be matched. Up to [`EXACT_LIMIT`] nodes per
//! side the assignment is exact; above it a greedy pass is used.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::mxgraph::{CellKind, GraphModel};
use crate::render::{layout_model, strip_markup, ShapeKind};

pub const W_NODE: f64 = 0.4;
pub const W_EDGE: f64 = 0.4;
pub const W_LABEL: f64 = 0.2;
pub const MATCH_THRESHOLD: f64 = 0.5;
pub const EXACT_LIMIT: usize = 12;

const EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralScore {
    pub node_f1: f64,
    pub edge_f1: f64,
    pub label_similarity: f64,
    pub combined: f64,
}

impl StructuralScore {
    fn new(node_f1: f64, edge_f1: f64, label_similarity: f64) -> StructuralScore {
        let combined = W_NODE * node_f1 + W_EDGE * edge_f1 + W_LABEL * label_similarity;
        StructuralScore { node_f1, edge_f1, label_similarity, combined }
    }
}

/// A node as seen by the matcher.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeView {
    pub id: String,
    pub label: String,
    pub shape: String,
    pub center: (f64, f64),
}

fn normalize_label(value: &str) -> String {
    strip_markup(value).split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

fn shape_name(cell: &crate::mxgraph::Cell) -> String {
    match ShapeKind::for_cell(cell) {
        Ok(Some(kind)) => format!("{kind:?}"),
        _ => cell.style.shape_token().to_string(),
    }
}

/// Vertex-like cells in id order, excluding edge labels. Centers are absolute.
pub fn node_views(model: &GraphModel) -> Vec<NodeView> {
    let kinds: HashMap<&str, CellKind> = model.cells.iter().map(|c| (c.id.as_str(), c.kind)).collect();
    let boxes = layout_model(model).map(|l| l.boxes).unwrap_or_default();
    let mut out: Vec<NodeView> = model
        .user_cells()
        .iter()
        .filter(|c| c.kind.is_vertex_like())
        .filter(|c| !c.parent.as_deref().is_some_and(|p| kinds.get(p) == Some(&CellKind::Edge)))
        .map(|c| {
            let center = match (boxes.get(&c.id), &c.geometry) {
                (Some(r), _) => (r.x + r.width / 2.0, r.y + r.height / 2.0),
                (None, Some(g)) => (g.x + g.width / 2.0, g.y + g.height / 2.0),
                (None, None) => (0.0, 0.0),
            };
            NodeView { id: c.id.clone(), label: normalize_label(&c.value), shape: shape_name(c), center }
        })
        .collect();
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

pub fn label_similarity(a: &str, b: &str) -> f64 {
    if a.is_empty() && b.is_empty() {
        1.0
    } else {
        strsim::normalized_levenshtein(a, b)
    }
}

/// Diagonal of the box spanning every center on both sides, at least 1.
fn span(a: &[NodeView], b: &[NodeView]) -> f64 {
    let mut it = a.iter().chain(b).map(|n| n.center);
    let Some(first) = it.next() else { return 1.0 };
    let (mut lo, mut hi) = (first, first);
    for (x, y) in it {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    (hi.0 - lo.0).hypot(hi.1 - lo.1).max(1.0)
}

pub fn pair_weight(a: &NodeView, b: &NodeView, span: f64) -> f64 {
    let dist = ((a.center.0 - b.center.0).hypot(a.center.1 - b.center.1) / span).min(1.0);
    let shape = if a.shape == b.shape { 1.0 } else { 0.0 };
    0.5 * label_similarity(&a.label, &b.label) + 0.25 * shape + 0.25 * (1.0 - dist)
}

/// Pair weights, `None` below the match threshold.
pub fn weight_matrix(candidate: &[NodeView], reference: &[NodeView]) -> Vec<Vec<Option<f64>>> {
    let s = span(candidate, reference);
    candidate
        .iter()
        .map(|a| {
            reference
                .iter()
                .map(|b| {
                    let w = pair_weight(a, b, s);
                    (w >= MATCH_THRESHOLD).then_some(w)
                })
                .collect()
        })
        .collect()
}

/// Better objective: more weight, then more pairs.
fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 + EPS || ((a.0 - b.0).abs() <= EPS && a.1 > b.1)
}

/// Maximum-weight assignment by dynamic programming over used-column masks.
/// Requires at most [`EXACT_LIMIT`] columns.
pub fn exact_assignment(w: &[Vec<Option<f64>>], cols: usize) -> Vec<(usize, usize)> {
    assert!(cols <= EXACT_LIMIT, "exact assignment is limited to {EXACT_LIMIT} columns");
    let rows = w.len();
    let full = 1usize << cols;
    // best[i][mask]: optimum over rows i.. with `mask` columns taken.
    let mut best = vec![vec![(0.0f64, 0usize); full]; rows + 1];
    for i in (0..rows).rev() {
        for mask in 0..full {
            let mut b = best[i + 1][mask];
            for (j, wij) in w[i].iter().enumerate() {
                if let Some(wij) = wij {
                    if mask & (1 << j) == 0 {
                        let next = best[i + 1][mask | (1 << j)];
                        let cand = (next.0 + wij, next.1 + 1);
                        if better(cand, b) {
                            b = cand;
                        }
                    }
                }
            }
            best[i][mask] = b;
        }
    }
    let mut pairs = Vec::new();
    let mut mask = 0usize;
    for i in 0..rows {
        let target = best[i][mask];
        if better(target, best[i + 1][mask]) {
            let j = (0..cols)
                .find(|&j| {
                    mask & (1 << j) == 0
                        && w[i][j].is_some_and(|wij| {
                            let next = best[i + 1][mask | (1 << j)];
                            !better(target, (next.0 + wij, next.1 + 1))
                        })
                })
                .expect("an optimal column exists");
            pairs.push((i, j));
            mask |= 1 << j;
        }
    }
    pairs
}

/// Heaviest-first greedy assignment; ties resolve to the lower row, then column.
pub fn greedy_assignment(w: &[Vec<Option<f64>>]) -> Vec<(usize, usize)> {
    let mut cands: Vec<(f64, usize, usize)> =
        w.iter().enumerate().flat_map(|(i, row)| row.iter().enumerate().filter_map(move |(j, x)| x.map(|x| (x, i, j)))).collect();
    cands.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let cols = w.first().map_or(0, Vec::len);
    let (mut used_r, mut used_c) = (vec![false; w.len()], vec![false; cols]);
    let mut pairs = Vec::new();
    for (_, i, j) in cands {
        if !used_r[i] && !used_c[j] {
            used_r[i] = true;
            used_c[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Total weight of an assignment.
pub fn assignment_weight(w: &[Vec<Option<f64>>], pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(i, j)| w[i][j].expect("matched pair is above threshold")).sum()
}

fn f1(matched: usize, a: usize, b: usize) -> f64 {
    if a == 0 && b == 0 {
        1.0
    } else {
        2.0 * matched as f64 / (a + b) as f64
    }
}

fn edge_pairs(model: &GraphModel) -> Vec<(Option<&str>, Option<&str>)> {
    model.edges().map(|e| (e.source.as_deref(), e.target.as_deref())).collect()
}

pub fn structural_similarity(candidate: &GraphModel, reference: &GraphModel) -> StructuralScore {
    let cn = node_views(candidate);
    let rn = node_views(reference);
    let w = weight_matrix(&cn, &rn);
    let pairs = if cn.len().max(rn.len()) <= EXACT_LIMIT { exact_assignment(&w, rn.len()) } else { greedy_assignment(&w) };

    let node_f1 = f1(pairs.len(), cn.len(), rn.len());
    let label_similarity = if cn.is_empty() && rn.is_empty() {
        1.0
    } else {
        pairs.iter().map(|&(i, j)| label_similarity(&cn[i].label, &rn[j].label)).sum::<f64>() / cn.len().max(rn.len()) as f64
    };

    let map: HashMap<&str, &str> = pairs.iter().map(|&(i, j)| (cn[i].id.as_str(), rn[j].id.as_str())).collect();
    let mut pool: HashMap<(&str, &str), usize> = HashMap::new();
    let ref_edges = edge_pairs(reference);
    for (s, t) in &ref_edges {
        if let (Some(s), Some(t)) = (s, t) {
            *pool.entry((s, t)).or_default() += 1;
        }
    }
    let cand_edges = edge_pairs(candidate);
    let mut matched = 0;
    for (s, t) in &cand_edges {
        let mapped = s.and_then(|s| map.get(s)).zip(t.and_then(|t| map.get(t)));
        if let Some((&s, &t)) = mapped {
            if let Some(n) = pool.get_mut(&(s, t)).filter(|n| **n > 0) {
                *n -= 1;
                matched += 1;
            }
        }
    }
    let edge_f1 = f1(matched, cand_edges.len(), ref_edges.len());
    StructuralScore::new(node_f1, edge_f1, label_similarity)
}
