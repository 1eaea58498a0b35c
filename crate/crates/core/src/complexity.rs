//! Five-dimension complexity profile of a diagram and its difficulty band.
//!
//! Each dimension first reduces the model to a raw count `r` (see
//! [`ComplexityInputs`]) and then saturates it as `5 * (1 - exp(-r / k))`,
//! which is monotone in `r` and bounded by 5.
//!
//! | dimension  | raw count                                                   | k     |
//! |------------|-------------------------------------------------------------|-------|
//! | connection | edges + 0.5 waypoints + 0.25 fan excess                     | 26.24 |
//! | graphical  | vertices + 3 distinct shapes + 4 max nesting depth          | 29    |
//! | color      | distinct colours + 0.5 effect keys                          | 5.6   |
//! | text       | labels + label characters / 40                              | 30    |
//! | special    | non-core shapes + exotic style keys                         | 8     |
//!
//! With these constants 45 plain edges score 4.1 on connection.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::mxgraph::{CellKind, GraphModel};
use crate::render::strip_markup;

pub const K_CONNECTION: f64 = 26.24;
pub const K_GRAPHICAL: f64 = 29.0;
pub const K_COLOR: f64 = 5.6;
pub const K_TEXT: f64 = 30.0;
pub const K_SPECIAL: f64 = 8.0;

/// Style keys holding colours.
pub const COLOR_KEYS: [&str; 6] = ["fillColor", "strokeColor", "fontColor", "gradientColor", "labelBackgroundColor", "labelBorderColor"];
/// Transparency and lighting keys.
pub const EFFECT_KEYS: [&str; 7] = ["opacity", "fillOpacity", "strokeOpacity", "textOpacity", "gradientDirection", "shadow", "glass"];
/// Style keys outside everyday flowchart styling.
pub const EXOTIC_KEYS: [&str; 12] = [
    "image",
    "sketch",
    "comic",
    "rotation",
    "flipH",
    "flipV",
    "direction",
    "perimeter",
    "jumpStyle",
    "curved",
    "labelPosition",
    "verticalLabelPosition",
];
/// Shape tokens that do not count as special.
pub const CORE_SHAPES: [&str; 10] =
    ["rectangle", "rect", "label", "rounded", "ellipse", "rhombus", "text", "edgeLabel", "group", "swimlane"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Difficulty {
    #[serde(alias = "easy")]
    Easy,
    #[serde(alias = "medium")]
    Medium,
    #[serde(alias = "hard")]
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "Easy",
            Difficulty::Medium => "Medium",
            Difficulty::Hard => "Hard",
        }
    }

    pub fn parse(text: &str) -> Option<Difficulty> {
        match text.to_ascii_lowercase().as_str() {
            "easy" => Some(Difficulty::Easy),
            "medium" => Some(Difficulty::Medium),
            "hard" => Some(Difficulty::Hard),
            _ => None,
        }
    }
}

/// Mean-score band edges: below `medium` is Easy, at or above `hard` is Hard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub medium: f64,
    pub hard: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { medium: 2.0, hard: 3.5 }
    }
}

/// Raw counts behind the scores.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexityInputs {
    pub vertices: usize,
    pub edges: usize,
    pub waypoints: usize,
    /// Sum over vertices of `max(0, in - 1) + max(0, out - 1)`.
    pub fan_excess: usize,
    pub distinct_shapes: usize,
    /// Largest number of vertex-like ancestors of any vertex.
    pub max_depth: usize,
    pub distinct_colors: usize,
    pub effect_keys: usize,
    pub labels: usize,
    pub label_chars: usize,
    pub non_core_shapes: usize,
    pub exotic_keys: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub connection: f64,
    pub graphical: f64,
    pub color: f64,
    pub text: f64,
    pub special: f64,
    pub difficulty: Difficulty,
    pub inputs: ComplexityInputs,
}

impl ComplexityProfile {
    pub fn scores(&self) -> [f64; 5] {
        [self.connection, self.graphical, self.color, self.text, self.special]
    }

    pub fn mean(&self) -> f64 {
        self.scores().iter().sum::<f64>() / 5.0
    }
}

pub fn saturate(raw: f64, k: f64) -> f64 {
    (5.0 * (1.0 - (-raw.max(0.0) / k).exp())).clamp(0.0, 5.0)
}

/// Colour value normalised for counting, or `None` for `none`.
fn color_value(v: &str) -> Option<String> {
    let v = v.trim().to_ascii_lowercase();
    (!v.is_empty() && v != "none").then_some(v)
}

pub fn inputs(model: &GraphModel) -> ComplexityInputs {
    let mut x = ComplexityInputs::default();
    let kinds: HashMap<&str, CellKind> = model.cells.iter().map(|c| (c.id.as_str(), c.kind)).collect();
    let parents: HashMap<&str, &str> = model.cells.iter().filter_map(|c| c.parent.as_deref().map(|p| (c.id.as_str(), p))).collect();
    let mut shapes = BTreeSet::new();
    let mut colors = BTreeSet::new();
    let (mut fan_in, mut fan_out): (HashMap<&str, usize>, HashMap<&str, usize>) = (HashMap::new(), HashMap::new());

    for cell in model.user_cells() {
        if cell.kind == CellKind::Structural {
            continue;
        }
        let style = &cell.style;
        for key in COLOR_KEYS {
            if let Some(c) = style.get(key).and_then(color_value) {
                colors.insert(c);
            }
        }
        x.effect_keys += EFFECT_KEYS.iter().filter(|k| style.get(k).is_some_and(|v| v != "0")).count();
        x.exotic_keys += EXOTIC_KEYS.iter().filter(|k| style.get(k).is_some()).count();
        let label = strip_markup(&cell.value);
        if !label.trim().is_empty() {
            x.labels += 1;
            x.label_chars += label.chars().count();
        }
        match cell.kind {
            CellKind::Edge => {
                x.edges += 1;
                x.waypoints += cell.geometry.as_ref().map_or(0, |g| g.waypoints.len());
                if let Some(s) = cell.source.as_deref() {
                    *fan_out.entry(s).or_default() += 1;
                }
                if let Some(t) = cell.target.as_deref() {
                    *fan_in.entry(t).or_default() += 1;
                }
            }
            // Edge labels only contribute their text.
            CellKind::Vertex if cell.parent.as_deref().is_some_and(|p| kinds.get(p) == Some(&CellKind::Edge)) => {}
            CellKind::Vertex | CellKind::Group => {
                x.vertices += 1;
                let token = if cell.kind == CellKind::Group { "group" } else { style.shape_token() };
                shapes.insert(token.to_string());
                if !CORE_SHAPES.contains(&token) {
                    x.non_core_shapes += 1;
                }
                let mut depth = 0;
                let mut cur = cell.parent.as_deref();
                while let Some(p) = cur {
                    if !kinds.get(p).is_some_and(|k| k.is_vertex_like()) || depth > model.cells.len() {
                        break;
                    }
                    depth += 1;
                    cur = parents.get(p).copied();
                }
                x.max_depth = x.max_depth.max(depth);
            }
            CellKind::Structural => {}
        }
    }
    x.fan_excess = fan_in.values().chain(fan_out.values()).map(|d| d.saturating_sub(1)).sum();
    x.distinct_shapes = shapes.len();
    x.distinct_colors = colors.len();
    x
}

pub fn profile(model: &GraphModel) -> ComplexityProfile {
    profile_with(model, &Thresholds::default())
}

pub fn profile_with(model: &GraphModel, thresholds: &Thresholds) -> ComplexityProfile {
    let x = inputs(model);
    let mut p = ComplexityProfile {
        connection: saturate(x.edges as f64 + 0.5 * x.waypoints as f64 + 0.25 * x.fan_excess as f64, K_CONNECTION),
        graphical: saturate(x.vertices as f64 + 3.0 * x.distinct_shapes as f64 + 4.0 * x.max_depth as f64, K_GRAPHICAL),
        color: saturate(x.distinct_colors as f64 + 0.5 * x.effect_keys as f64, K_COLOR),
        text: saturate(x.labels as f64 + x.label_chars as f64 / 40.0, K_TEXT),
        special: saturate((x.non_core_shapes + x.exotic_keys) as f64, K_SPECIAL),
        difficulty: Difficulty::Easy,
        inputs: x,
    };
    p.difficulty = classify_with(&p.scores(), thresholds);
    p
}

pub fn classify(scores: &[f64; 5]) -> Difficulty {
    classify_with(scores, &Thresholds::default())
}

pub fn classify_with(scores: &[f64; 5], thresholds: &Thresholds) -> Difficulty {
    let mean = scores.iter().sum::<f64>() / 5.0;
    if mean >= thresholds.hard {
        Difficulty::Hard
    } else if mean >= thresholds.medium {
        Difficulty::Medium
    } else {
        Difficulty::Easy
    }
}
