//! Per-entry results and the per-difficulty summary table.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::similarity::StructuralScore;
use crate::complexity::Difficulty;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub id: String,
    /// `None` only when the reference could not be read and no override exists.
    pub difficulty: Option<Difficulty>,
    /// Mean complexity score of the reference.
    pub complexity: Option<f64>,
    pub valid: bool,
    pub fallback: bool,
    pub t_star: Option<usize>,
    pub rounds: usize,
    pub tokens: u64,
    pub structural: Option<StructuralScore>,
    pub clip: Option<f64>,
    pub dino: Option<f64>,
    pub aesthetic: Option<f64>,
    /// Set-level FID of the entry's difficulty group.
    pub fid_group: Option<f64>,
    pub candidate_png: Option<String>,
    pub reference_png: Option<String>,
    /// Why the entry failed; a failed entry is never valid.
    pub error: Option<String>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl EntryReport {
    pub fn failed(id: &str, difficulty: Option<Difficulty>, error: String) -> EntryReport {
        EntryReport {
            id: id.to_string(),
            difficulty,
            complexity: None,
            valid: false,
            fallback: false,
            t_star: None,
            rounds: 0,
            tokens: 0,
            structural: None,
            clip: None,
            dino: None,
            aesthetic: None,
            fid_group: None,
            candidate_png: None,
            reference_png: None,
            error: Some(error),
            notes: Vec::new(),
        }
    }
}

/// One row of the summary. Optional columns are means over entries that
/// have the value, `None` when none do.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// `Easy`, `Medium`, `Hard` or `All`.
    pub difficulty: String,
    pub n: usize,
    /// Fraction of entries whose final XML is valid.
    pub validity: Option<f64>,
    pub clip: Option<f64>,
    pub dino: Option<f64>,
    pub fid: Option<f64>,
    pub aesthetic: Option<f64>,
    /// Mean tokens per entry, in thousands.
    pub tokens_k: Option<f64>,
    /// Mean combined structural score.
    pub structural: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricReport {
    pub entries: Vec<EntryReport>,
    pub aggregates: Vec<Aggregate>,
    pub metrics_backend: Option<String>,
    pub checkpoints: Option<Value>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn row(label: &str, entries: &[&EntryReport]) -> Aggregate {
    let n = entries.len();
    let opt = |f: fn(&EntryReport) -> Option<f64>| mean(entries.iter().filter_map(|e| f(e)));
    Aggregate {
        difficulty: label.to_string(),
        n,
        validity: mean(entries.iter().map(|e| if e.valid { 1.0 } else { 0.0 })),
        clip: opt(|e| e.clip),
        dino: opt(|e| e.dino),
        fid: opt(|e| e.fid_group),
        aesthetic: opt(|e| e.aesthetic),
        tokens_k: mean(entries.iter().map(|e| e.tokens as f64 / 1000.0)),
        structural: opt(|e| e.structural.map(|s| s.combined)),
    }
}

/// Summary rows for each band followed by `All`. Depends only on `entries`.
pub fn aggregate(entries: &[EntryReport]) -> Vec<Aggregate> {
    let mut rows: Vec<Aggregate> =
        Difficulty::ALL.iter().map(|d| row(d.as_str(), &entries.iter().filter(|e| e.difficulty == Some(*d)).collect::<Vec<_>>())).collect();
    rows.push(row("All", &entries.iter().collect::<Vec<_>>()));
    rows
}

pub const CSV_HEADER: &str = "difficulty,n,validity,clip,dino,fid,aesthetic,tokens_k,structural";

pub fn to_csv(rows: &[Aggregate]) -> String {
    let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut out = format!("{CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.difficulty,
            r.n,
            cell(r.validity),
            cell(r.clip),
            cell(r.dino),
            cell(r.fid),
            cell(r.aesthetic),
            cell(r.tokens_k),
            cell(r.structural)
        );
    }
    out
}

/// Writes `report.json` and `report.csv` into `dir`.
pub fn write_report(report: &MetricReport, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("report.json"), json)?;
    std::fs::write(dir.join("report.csv"), to_csv(&report.aggregates))
}
