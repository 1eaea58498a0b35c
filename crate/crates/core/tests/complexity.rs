mod common;

use std::collections::{BTreeSet, HashMap};

use dwt_core::complexity::{
    classify, classify_with, inputs, profile, saturate, Difficulty, Thresholds, K_COLOR, K_CONNECTION, K_GRAPHICAL,
};
use dwt_core::mxgraph::{parse_document, Cell, GraphModel, StyleMap};
use proptest::prelude::*;
use regex::Regex;

/// Counts taken straight from the XML text, independent of the parser.
struct RawCounts {
    vertices: usize,
    edges: usize,
    waypoints: usize,
    colors: usize,
    labels: usize,
    max_depth: usize,
}

fn raw_counts(xml: &str) -> RawCounts {
    let cell = Regex::new(r#"<mxCell ([^>]*?)/?>"#).unwrap();
    let attr = |tag: &str, name: &str| Regex::new(&format!(r#"\b{name}="([^"]*)""#)).unwrap().captures(tag).map(|c| c[1].to_string());
    let mut parent_of = HashMap::new();
    let mut vertex_ids = Vec::new();
    let mut labels = 0;
    for c in cell.captures_iter(xml) {
        let tag = &c[1];
        let id = attr(tag, "id").unwrap();
        if let Some(p) = attr(tag, "parent") {
            parent_of.insert(id.clone(), p);
        }
        if tag.contains("vertex=\"1\"") {
            vertex_ids.push(id.clone());
        }
        if attr(tag, "value").is_some_and(|v| !v.trim().is_empty()) {
            labels += 1;
        }
    }
    let vertex_set: BTreeSet<&String> = vertex_ids.iter().collect();
    let depth = |id: &String| {
        let mut d = 0;
        let mut cur = parent_of.get(id);
        while let Some(p) = cur.filter(|p| vertex_set.contains(p)) {
            d += 1;
            cur = parent_of.get(p);
        }
        d
    };
    let colors: BTreeSet<String> =
        Regex::new(r"(?:fillColor|strokeColor|fontColor|gradientColor|labelBackgroundColor|labelBorderColor)=([^;\x22]+)")
            .unwrap()
            .captures_iter(xml)
            .map(|c| c[1].to_lowercase())
            .filter(|c| c != "none")
            .collect();
    let arrays = Regex::new(r#"(?s)<Array as="points">(.*?)</Array>"#).unwrap();
    RawCounts {
        vertices: vertex_ids.len(),
        edges: xml.matches("edge=\"1\"").count(),
        waypoints: arrays.captures_iter(xml).map(|c| c[1].matches("<mxPoint").count()).sum(),
        colors: colors.len(),
        labels,
        max_depth: vertex_ids.iter().map(depth).max().unwrap_or(0),
    }
}

#[test]
fn synthetic_fixture_matches_raw_count_oracle() {
    let xml = std::fs::read_to_string(common::fixtures().join("complexity/synthetic_30n_45e.xml")).unwrap();
    let raw = raw_counts(&xml);
    assert_eq!((raw.vertices, raw.edges, raw.colors), (30, 45, 8));
    let model = parse_document(&xml).unwrap().model;
    let x = inputs(&model);
    assert_eq!(x.vertices, raw.vertices);
    assert_eq!(x.edges, raw.edges);
    assert_eq!(x.waypoints, raw.waypoints);
    assert_eq!(x.distinct_colors, raw.colors);
    assert_eq!(x.labels, raw.labels);
    assert_eq!(x.max_depth, raw.max_depth);
    assert_eq!(x.max_depth, 5);

    let p = profile(&model);
    let conn = saturate(x.edges as f64 + 0.5 * x.waypoints as f64 + 0.25 * x.fan_excess as f64, K_CONNECTION);
    assert_eq!(p.connection, conn);
    assert_eq!(p.graphical, saturate(x.vertices as f64 + 3.0 * x.distinct_shapes as f64 + 4.0 * x.max_depth as f64, K_GRAPHICAL));
    assert_eq!(p.color, saturate(x.distinct_colors as f64 + 0.5 * x.effect_keys as f64, K_COLOR));
    assert!(p.connection > 4.1 && p.graphical > 4.0 && p.color > 3.5, "{p:?}");
}

#[test]
fn fixtures_agree_with_the_oracle() {
    for (name, xml) in common::valid_fixtures() {
        let raw = raw_counts(&xml);
        let x = inputs(&parse_document(&xml).unwrap().model);
        // Edge-label children are text, not vertices.
        let edge_labels = xml.matches("edgeLabel").count();
        assert_eq!(x.vertices + edge_labels, raw.vertices, "{name}");
        assert_eq!((x.edges, x.waypoints, x.distinct_colors, x.max_depth), (raw.edges, raw.waypoints, raw.colors, raw.max_depth), "{name}");
    }
}

#[test]
fn documented_bands() {
    assert_eq!(profile(&GraphModel::empty()).difficulty, Difficulty::Easy);
    assert_eq!(classify(&[4.1, 4.3, 3.8, 3.9, 4.0]), Difficulty::Hard);
    assert_eq!(classify(&[2.5; 5]), Difficulty::Medium);
    assert_eq!(classify(&[2.0; 5]), Difficulty::Medium);
    assert_eq!(classify(&[3.5; 5]), Difficulty::Hard);
    assert_eq!(classify(&[1.9; 5]), Difficulty::Easy);
    let strict = Thresholds { medium: 1.0, hard: 2.0 };
    assert_eq!(classify_with(&[1.0; 5], &strict), Difficulty::Medium);
    assert_eq!(classify_with(&[2.0; 5], &strict), Difficulty::Hard);
}

fn with_extra_edge(model: &GraphModel, pick: usize) -> Option<GraphModel> {
    let ids: Vec<String> = model.vertices().map(|v| v.id.clone()).collect();
    if ids.is_empty() {
        return None;
    }
    let mut m = model.clone();
    let (s, t) = (ids[pick % ids.len()].clone(), ids[(pick / 7) % ids.len()].clone());
    m.cells.push(Cell::edge("extra-edge", Some(s), Some(t), "", StyleMap::new()));
    Some(m)
}

fn with_new_color(model: &GraphModel, pick: usize) -> Option<GraphModel> {
    let idx: Vec<usize> = model.cells.iter().enumerate().filter(|(_, c)| c.kind.is_vertex_like()).map(|(i, _)| i).collect();
    let &i = idx.get(pick % idx.len().max(1))?;
    let mut m = model.clone();
    let mut style = m.cells[i].style.clone();
    style.set("labelBorderColor", "#0a0b0c");
    m.cells[i].style = style;
    Some(m)
}

fn with_longer_label(model: &GraphModel, pick: usize) -> GraphModel {
    let mut m = model.clone();
    let n = m.cells.len();
    let i = 2 + pick % (n - 1).max(1);
    if i < n {
        m.cells[i].value.push_str(" more text");
    } else {
        m.cells.push(Cell::vertex("extra-label", "label", StyleMap::new(), dwt_core::mxgraph::Geometry::rect(0.0, 0.0, 10.0, 10.0)));
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scores_are_monotone_and_bounded(seed in any::<u64>(), pick in 0usize..1000) {
        let model = common::random_document(&mut common::rng(seed)).model;
        let base = profile(&model);
        prop_assert!(base.scores().iter().all(|s| (0.0..=5.0).contains(s)));
        if let Some(m) = with_extra_edge(&model, pick) {
            prop_assert!(profile(&m).connection >= base.connection);
        }
        if let Some(m) = with_new_color(&model, pick) {
            prop_assert!(profile(&m).color >= base.color);
        }
        prop_assert!(profile(&with_longer_label(&model, pick)).text >= base.text);
    }

    #[test]
    fn classification_follows_the_mean(a in 0.0f64..5.0, b in 0.0f64..5.0, c in 0.0f64..5.0, d in 0.0f64..5.0, e in 0.0f64..5.0) {
        let mean = (a + b + c + d + e) / 5.0;
        let want = if mean >= 3.5 { Difficulty::Hard } else if mean >= 2.0 { Difficulty::Medium } else { Difficulty::Easy };
        prop_assert_eq!(classify(&[a, b, c, d, e]), want);
    }
}
