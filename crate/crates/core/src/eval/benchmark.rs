//! Manifest-driven benchmark runs.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::manifest::{BenchmarkManifest, ManifestEntry};
use super::metrics::{MetricJob, MetricPair, MetricsBackend};
use super::report::{aggregate, EntryReport, MetricReport};
use super::similarity::structural_similarity;
use crate::complexity::{profile_with, Difficulty, Thresholds};
use crate::mxgraph::{parse_document, GraphModel};
use crate::orchestrator::{run_pipeline, InputDiagram, ModelClient, PipelineConfig};
use crate::render::{rasterize, render_svg, RenderOptions};
use crate::verifier::verify;

#[derive(Debug, Clone)]
pub struct BenchmarkOptions {
    pub pipeline: PipelineConfig,
    /// Receives `renders/`, `traces/` and `metrics/`.
    pub out_dir: PathBuf,
    pub render: RenderOptions,
    pub raster_scale: f64,
    /// Worker threads; entries are independent.
    pub jobs: usize,
    pub thresholds: Thresholds,
}

impl BenchmarkOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> BenchmarkOptions {
        BenchmarkOptions {
            pipeline: PipelineConfig::default(),
            out_dir: out_dir.into(),
            render: RenderOptions::default(),
            raster_scale: 1.0,
            jobs: 1,
            thresholds: Thresholds::default(),
        }
    }
}

/// Supplies the model client for one entry.
pub type ClientFactory<'a> = dyn Fn(&ManifestEntry) -> Result<Box<dyn ModelClient>, String> + Sync + 'a;

fn render_png(model: &GraphModel, opts: &BenchmarkOptions, path: &Path) -> Result<String, String> {
    let svg = render_svg(model, &opts.render).map_err(|e| format!("render: {e}"))?;
    let png = rasterize(&svg, opts.raster_scale).map_err(|e| format!("rasterize: {e}"))?;
    std::fs::write(path, png).map_err(|e| format!("write {}: {e}", path.display()))?;
    Ok(path.display().to_string())
}

fn run_entry(entry: &ManifestEntry, opts: &BenchmarkOptions, clients: &ClientFactory<'_>) -> EntryReport {
    let reference = std::fs::read_to_string(&entry.reference_xml_path)
        .map_err(|e| format!("reference: {e}"))
        .and_then(|text| parse_document(&text).map_err(|e| format!("reference: {e}")));
    let reference = match reference {
        Ok(doc) => doc.model,
        Err(e) => return EntryReport::failed(&entry.id, entry.difficulty, e),
    };
    let profile = profile_with(&reference, &opts.thresholds);
    let difficulty = entry.difficulty.unwrap_or(profile.difficulty);
    let fail = |e: String| {
        let mut r = EntryReport::failed(&entry.id, Some(difficulty), e);
        r.complexity = Some(profile.mean());
        r
    };

    let image = match InputDiagram::load(&entry.image_path) {
        Ok(i) => i,
        Err(e) => return fail(format!("image: {e}")),
    };
    let client = match clients(entry) {
        Ok(c) => c,
        Err(e) => return fail(format!("client: {e}")),
    };
    let mut config = opts.pipeline.clone();
    config.trace_dir = Some(opts.out_dir.join("traces").join(&entry.id));
    config.stem = entry.id.clone();
    let result = match run_pipeline(&image, client.as_ref(), &config) {
        Ok(r) => r,
        Err(e) => return fail(format!("pipeline: {e}")),
    };

    let mut report = fail(String::new());
    report.error = None;
    report.valid = verify(&result.final_xml).is_valid();
    report.fallback = result.fallback;
    report.t_star = result.trace.t_star;
    report.rounds = result.trace.rounds.len();
    report.tokens = result.total_usage.total();

    let renders = opts.out_dir.join("renders");
    if let Err(e) = std::fs::create_dir_all(&renders) {
        report.notes.push(format!("renders: {e}"));
    }
    match render_png(&reference, opts, &renders.join(format!("{}.reference.png", entry.id))) {
        Ok(p) => report.reference_png = Some(p),
        Err(e) => report.notes.push(format!("reference {e}")),
    }
    match parse_document(&result.final_xml) {
        Ok(doc) => {
            report.structural = Some(structural_similarity(&doc.model, &reference));
            match render_png(&doc.model, opts, &renders.join(format!("{}.candidate.png", entry.id))) {
                Ok(p) => report.candidate_png = Some(p),
                Err(e) => report.notes.push(format!("candidate {e}")),
            }
        }
        Err(e) => report.notes.push(format!("candidate does not parse: {e}")),
    }
    report
}

/// Submits one job per difficulty band and merges the scores in place.
fn score_perceptual(report: &mut MetricReport, backend: &dyn MetricsBackend, out_dir: &Path) {
    report.metrics_backend = Some(backend.describe());
    for band in Difficulty::ALL {
        let pairs: Vec<MetricPair> = report
            .entries
            .iter()
            .filter(|e| e.difficulty == Some(band))
            .filter_map(|e| {
                Some(MetricPair {
                    id: e.id.clone(),
                    candidate_png: e.candidate_png.clone()?.into(),
                    reference_png: e.reference_png.clone()?.into(),
                })
            })
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let job = MetricJob { pairs };
        match backend.score(&job, &out_dir.join("metrics").join(band.as_str().to_lowercase())) {
            Ok(resp) => {
                for s in &resp.scores {
                    if let Some(e) = report.entries.iter_mut().find(|e| e.id == s.id) {
                        e.clip = s.clip;
                        e.dino = s.dino;
                        e.aesthetic = s.aesthetic;
                    }
                }
                for e in report.entries.iter_mut().filter(|e| job.pairs.iter().any(|p| p.id == e.id)) {
                    e.fid_group = resp.fid;
                }
                if resp.checkpoints.is_some() {
                    report.checkpoints = resp.checkpoints;
                }
            }
            Err(e) => report.warnings.push(format!("{} metrics: {e}", band.as_str())),
        }
    }
}

/// Runs every entry, never aborting on a per-entry failure, then scores the
/// renders through `metrics` when one is given.
pub fn run_benchmark(
    manifest: &BenchmarkManifest,
    opts: &BenchmarkOptions,
    clients: &ClientFactory<'_>,
    metrics: Option<&dyn MetricsBackend>,
) -> MetricReport {
    let slots: Mutex<Vec<Option<EntryReport>>> = Mutex::new(vec![None; manifest.entries.len()]);
    let next = AtomicUsize::new(0);
    let workers = opts.jobs.clamp(1, manifest.entries.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(entry) = manifest.entries.get(i) else { break };
                let r = run_entry(entry, opts, clients);
                slots.lock().expect("slots lock")[i] = Some(r);
            });
        }
    });
    let entries = slots.into_inner().expect("slots lock").into_iter().map(|r| r.expect("every entry ran")).collect();
    let mut report = MetricReport { entries, ..MetricReport::default() };
    if let Some(backend) = metrics {
        score_perceptual(&mut report, backend, &opts.out_dir);
    }
    report.aggregates = aggregate(&report.entries);
    report
}
