use std::path::{Path, PathBuf};

use dwt_core::complexity::profile_with;
use dwt_core::eval::{
    run_benchmark, write_report, BenchmarkManifest, BenchmarkOptions, CommandBackend, HttpBackend, ManifestEntry, MetricsBackend,
};
use dwt_core::ir::{plan_to_skeleton, LayoutPlan, PerceptReport};
use dwt_core::mxgraph::{parse_document, serialize_document, GraphDocument};
use dwt_core::orchestrator::{
    run_pipeline, HttpClient, HttpClientConfig, ImageError, InputDiagram, ModelClient, PipelineConfig, PipelineResult, ScriptedClient,
};
use dwt_core::render::{rasterize, render_svg};
use dwt_core::verifier::{verify, Verdict};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Config, Layer, RenderLayer, CONFIG_ENV};
use crate::{BenchmarkArgs, Cli, Command, ConvertArgs, ModelArgs};

pub const SUCCESS: u8 = 0;
pub const DOMAIN_FAILURE: u8 = 1;
pub const USAGE_ERROR: u8 = 2;

#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, settings or unreadable inputs.
    Usage(String),
    /// The inputs were understood but the work failed.
    Domain(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => USAGE_ERROR,
            Failure::Domain(_) => DOMAIN_FAILURE,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Domain(m) => m,
        }
    }
}

type Outcome = Result<u8, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn domain(msg: impl Into<String>) -> Failure {
    Failure::Domain(msg.into())
}

pub fn dispatch(cli: Cli) -> Outcome {
    let file = Config::file_layer(cli.config.as_deref(), std::env::var_os(CONFIG_ENV).map(PathBuf::from)).map_err(usage)?;
    let env = Layer::from_env(|k| std::env::var(k).ok()).map_err(usage)?;
    let base = file.overlay(env);
    let json = cli.json;
    match cli.command {
        Command::Validate { file } => validate(&file, json),
        Command::Render { file, out, scale } => {
            let flags = Layer { render: RenderLayer { scale, ..RenderLayer::default() }, ..Layer::default() };
            render(&file, &out, &resolve(base, flags)?, json)
        }
        Command::Analyze { file } => analyze(&file, &resolve(base, Layer::default())?, json),
        Command::Convert(args) => {
            let mut flags = model_layer(&args.model);
            flags.trace_dir = args.trace_dir.clone();
            convert(&args, &resolve(base, flags)?, json)
        }
        Command::Benchmark(args) => {
            let flags = model_layer(&args.model);
            benchmark(&args, &resolve(base, flags)?, json)
        }
        Command::Ir { dir, stem, skeleton } => inspect_trace(&dir, stem.as_deref(), skeleton.as_deref(), json),
    }
}

fn resolve(base: Layer, flags: Layer) -> Result<Config, Failure> {
    Config::resolve(base.overlay(flags)).map_err(usage)
}

fn model_layer(args: &ModelArgs) -> Layer {
    Layer {
        model: args.model.clone(),
        base_url: args.base_url.clone(),
        t_refine: args.max_refine,
        retries: args.retries,
        fallback_skeleton: args.fallback_skeleton.then_some(true),
        reattach_image: args.reattach_image.then_some(true),
        ..Layer::default()
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| domain(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| domain(format!("cannot write {}: {e}", path.display())))
}

fn print_json(value: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("output types serialize"));
}

fn load_document(path: &Path) -> Result<GraphDocument, Failure> {
    parse_document(&read_text(path)?).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn print_findings(verdict: &Verdict) {
    for f in &verdict.findings {
        println!("{:?} {} at {}: {}", f.severity, f.code.as_str(), f.location, f.message);
    }
}

fn validate(file: &Path, json: bool) -> Outcome {
    let verdict = verify(&read_text(file)?);
    if json {
        print_json(&verdict);
    } else {
        print_findings(&verdict);
        println!("{}: {}", file.display(), if verdict.is_valid() { "valid" } else { "invalid" });
    }
    Ok(if verdict.is_valid() { SUCCESS } else { DOMAIN_FAILURE })
}

/// Pixel size from a PNG header or the root `<svg>` attributes.
fn image_size(bytes: &[u8]) -> Option<(f64, f64)> {
    if bytes.starts_with(b"\x89PNG") && bytes.len() >= 24 {
        let be = |i: usize| u32::from_be_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]) as f64;
        return Some((be(16), be(20)));
    }
    let text = std::str::from_utf8(bytes).ok()?;
    let root = &text[text.find("<svg")?..];
    let root = &root[..root.find('>')?];
    let attr = |name: &str| {
        let start = root.find(&format!(" {name}=\""))? + name.len() + 3;
        root[start..].split('"').next()?.parse().ok()
    };
    Some((attr("width")?, attr("height")?))
}

fn render(file: &Path, out: &Path, cfg: &Config, json: bool) -> Outcome {
    let format = match out.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("svg") => "svg",
        Some("png") => "png",
        _ => return Err(usage(format!("{}: output must end in .svg or .png", out.display()))),
    };
    let model = load_document(file)?.model;
    let bytes = if format == "svg" {
        render_svg(&model, &cfg.render).map_err(|e| domain(e.to_string()))?.into_bytes()
    } else {
        // Rasterizing the unit-scale SVG keeps strokes and text proportional.
        let unit = dwt_core::render::RenderOptions { scale: 1.0, ..cfg.render.clone() };
        let svg = render_svg(&model, &unit).map_err(|e| domain(e.to_string()))?;
        rasterize(&svg, cfg.render.scale).map_err(|e| domain(e.to_string()))?
    };
    write_file(out, &bytes)?;
    let (width, height) = image_size(&bytes).unwrap_or_default();
    if json {
        print_json(&json!({"out": out, "format": format, "width": width, "height": height, "scale": cfg.render.scale}));
    } else {
        println!("wrote {} ({width}x{height})", out.display());
    }
    Ok(SUCCESS)
}

fn analyze(file: &Path, cfg: &Config, json: bool) -> Outcome {
    let p = profile_with(&load_document(file)?.model, &cfg.thresholds);
    if json {
        print_json(&p);
    } else {
        let names = ["connection", "graphical", "color", "text", "special"];
        for (name, score) in names.iter().zip(p.scores()) {
            println!("{name:<11} {score:.2}");
        }
        println!("{:<11} {:.2}", "mean", p.mean());
        println!("{:<11} {}", "difficulty", p.difficulty.as_str());
    }
    Ok(SUCCESS)
}

fn pipeline_config(cfg: &Config) -> PipelineConfig {
    PipelineConfig {
        t_refine: cfg.t_refine,
        retries: cfg.retries,
        trace_dir: cfg.trace_dir.clone(),
        fallback_skeleton: cfg.fallback_skeleton,
        reattach_image: cfg.reattach_image,
        ..PipelineConfig::default()
    }
}

/// A script file is used as is; a directory yields `<name>.script.json`,
/// falling back to `script.json`.
fn script_path(scripted: &Path, name: &str) -> Result<PathBuf, String> {
    if scripted.is_file() {
        return Ok(scripted.to_path_buf());
    }
    if !scripted.is_dir() {
        return Err(format!("--scripted {}: no such file or directory", scripted.display()));
    }
    let named = scripted.join(format!("{name}.script.json"));
    let shared = scripted.join("script.json");
    [named.clone(), shared].into_iter().find(|p| p.is_file()).ok_or_else(|| format!("no script for '{name}': expected {}", named.display()))
}

fn load_script(path: &Path) -> Result<ScriptedClient, String> {
    ScriptedClient::load(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Settings for live model calls, or a usage error naming what is missing.
fn http_config(cfg: &Config) -> Result<HttpClientConfig, Failure> {
    let key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.trim().is_empty()).ok_or_else(|| {
        usage(format!(
            "{} is not set. Export your API key as {}, or pass --scripted <dir> to replay recorded replies offline.",
            cfg.api_key_env, cfg.api_key_env
        ))
    })?;
    let model = cfg.model.clone().ok_or_else(|| usage("no model given: pass --model <name>, set DWT_MODEL, or add `model` to dwt.toml"))?;
    Ok(HttpClientConfig { api_key: Some(key), ..HttpClientConfig::new(cfg.base_url.clone(), model) })
}

fn convert(args: &ConvertArgs, cfg: &Config, json: bool) -> Outcome {
    let stem = args.image.file_stem().and_then(|s| s.to_str()).unwrap_or("diagram").to_string();
    let client: Box<dyn ModelClient> = match &args.model.scripted {
        Some(dir) => Box::new(load_script(&script_path(dir, &stem).map_err(usage)?).map_err(usage)?),
        None => Box::new(HttpClient::new(http_config(cfg)?)),
    };
    let image = InputDiagram::load(&args.image).map_err(|e| match e {
        ImageError::Io { .. } => usage(e.to_string()),
        _ => domain(format!("{}: {e}", args.image.display())),
    })?;
    let config = PipelineConfig { stem, ..pipeline_config(cfg) };
    let result = run_pipeline(&image, client.as_ref(), &config).map_err(|e| domain(e.to_string()))?;
    if let Some(out) = &args.out {
        write_file(out, result.final_xml.as_bytes())?;
    }
    let last = result.trace.rounds.last().map(|r| &r.verdict);
    if json {
        let mut summary = json!({
            "valid": result.valid,
            "fallback": result.fallback,
            "t_star": result.trace.t_star,
            "rounds": result.trace.rounds.len(),
            "usage": result.total_usage,
            "out": args.out,
            "trace_dir": config.trace_dir,
            "findings": last.map(|v| v.findings.clone()).unwrap_or_default(),
        });
        if args.out.is_none() {
            summary["xml"] = Value::String(result.final_xml.clone());
        }
        print_json(&summary);
    } else {
        if args.out.is_none() {
            println!("{}", result.final_xml);
        }
        let t_star = result.trace.t_star.map_or("none".to_string(), |t| t.to_string());
        eprintln!(
            "{} after {} round(s), t* = {t_star}, {} tokens{}",
            if result.valid { "valid" } else { "invalid" },
            result.trace.rounds.len(),
            result.total_usage.total(),
            if result.fallback { ", skeleton fallback" } else { "" }
        );
        if let Some(v) = last.filter(|v| !v.is_valid()) {
            for f in &v.findings {
                eprintln!("  {} at {}: {}", f.code.as_str(), f.location, f.message);
            }
        }
    }
    Ok(if result.valid { SUCCESS } else { DOMAIN_FAILURE })
}

fn benchmark(args: &BenchmarkArgs, cfg: &Config, json: bool) -> Outcome {
    if !(0.0..=1.0).contains(&args.min_validity) {
        return Err(usage(format!("--min-validity must lie in [0, 1], got {}", args.min_validity)));
    }
    let manifest = BenchmarkManifest::load(&args.manifest).map_err(|e| usage(e.to_string()))?;
    let http = match &args.model.scripted {
        Some(_) => None,
        None => Some(http_config(cfg)?),
    };
    let shared = http.map(|c| std::sync::Arc::new(HttpClient::new(c)));
    let scripted = args.model.scripted.clone();
    let factory = move |entry: &ManifestEntry| -> Result<Box<dyn ModelClient>, String> {
        match (&scripted, &shared) {
            (Some(dir), _) => Ok(Box::new(load_script(&script_path(dir, &entry.id)?)?)),
            (None, Some(client)) => Ok(Box::new(SharedClient(client.clone()))),
            (None, None) => unreachable!("http config resolved above"),
        }
    };
    let metrics: Option<Box<dyn MetricsBackend>> = match (&args.metrics_endpoint, &args.metrics_cmd) {
        (Some(url), _) => Some(Box::new(HttpBackend::new(url.clone()))),
        (None, Some(cmd)) => Some(Box::new(CommandBackend { args: args.metrics_args.clone(), ..CommandBackend::new(cmd) })),
        (None, None) => None,
    };
    let opts = BenchmarkOptions {
        pipeline: pipeline_config(cfg),
        render: cfg.render.clone(),
        jobs: args.jobs.max(1),
        thresholds: cfg.thresholds,
        ..BenchmarkOptions::new(&args.out)
    };
    let report = run_benchmark(&manifest, &opts, &factory, metrics.as_deref());
    write_report(&report, &args.out).map_err(|e| domain(e.to_string()))?;
    if json {
        print_json(&report);
    } else {
        let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "{:<8} {:>4} {:>8} {:>10} {:>6} {:>6} {:>8} {:>9} {:>8}",
            "band", "n", "validity", "structural", "clip", "dino", "fid", "aesthetic", "tokens_k"
        );
        for a in &report.aggregates {
            println!(
                "{:<8} {:>4} {:>8} {:>10} {:>6} {:>6} {:>8} {:>9} {:>8}",
                a.difficulty,
                a.n,
                cell(a.validity),
                cell(a.structural),
                cell(a.clip),
                cell(a.dino),
                cell(a.fid),
                cell(a.aesthetic),
                cell(a.tokens_k)
            );
        }
        for e in report.entries.iter().filter(|e| e.error.is_some()) {
            eprintln!("{}: {}", e.id, e.error.as_deref().unwrap_or_default());
        }
        for w in &report.warnings {
            eprintln!("warning: {w}");
        }
        eprintln!("report written to {}", args.out.display());
    }
    let validity = report.aggregates.last().and_then(|a| a.validity).unwrap_or(0.0);
    Ok(if validity < args.min_validity { DOMAIN_FAILURE } else { SUCCESS })
}

/// One HTTP client (and its rate limiter) shared by every benchmark worker.
struct SharedClient(std::sync::Arc<HttpClient>);

impl ModelClient for SharedClient {
    fn complete(
        &self,
        request: &dwt_core::orchestrator::CompletionRequest,
    ) -> Result<dwt_core::orchestrator::Completion, dwt_core::orchestrator::ModelError> {
        self.0.complete(request)
    }
}

fn trace_stem(dir: &Path, stem: Option<&str>) -> Result<String, Failure> {
    if let Some(s) = stem {
        return Ok(s.to_string());
    }
    let entries = std::fs::read_dir(dir).map_err(|e| usage(format!("cannot read {}: {e}", dir.display())))?;
    let mut stems: Vec<String> = entries
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter_map(|name| name.strip_suffix(".plan.json").or_else(|| name.strip_suffix(".trace.json")).map(str::to_string))
        .collect();
    stems.sort();
    stems.dedup();
    match stems.as_slice() {
        [one] => Ok(one.clone()),
        [] => Err(usage(format!("{} holds no trace files", dir.display()))),
        many => Err(usage(format!("{} holds several runs ({}); pick one with --stem", dir.display(), many.join(", ")))),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Option<T>, Failure> {
    if !path.is_file() {
        return Ok(None);
    }
    serde_json::from_str(&read_text(path)?).map(Some).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn inspect_trace(dir: &Path, stem: Option<&str>, skeleton: Option<&Path>, json: bool) -> Outcome {
    let stem = trace_stem(dir, stem)?;
    let percept: Option<PerceptReport> = read_json(&dir.join(format!("{stem}.percept.json")))?;
    let plan: Option<LayoutPlan> = read_json(&dir.join(format!("{stem}.plan.json")))?;
    let result: Option<PipelineResult> = read_json(&dir.join(format!("{stem}.trace.json")))?;
    if percept.is_none() && plan.is_none() && result.is_none() {
        return Err(usage(format!("no trace files for '{stem}' in {}", dir.display())));
    }
    if let Some(out) = skeleton {
        let plan = plan.as_ref().ok_or_else(|| domain(format!("no plan recorded for '{stem}'")))?;
        let doc = plan_to_skeleton(plan, &plan.styles).map_err(|e| domain(e.to_string()))?;
        write_file(out, serialize_document(&doc).as_bytes())?;
    }
    let rounds: Vec<Value> = result
        .iter()
        .flat_map(|r| &r.trace.rounds)
        .map(|r| {
            json!({
                "t": r.t,
                "status": r.verdict.status,
                "codes": r.verdict.errors().map(|f| f.code.as_str()).collect::<Vec<_>>(),
                "source": r.source,
                "calls": r.calls.len(),
                "tokens": r.usage.total(),
            })
        })
        .collect();
    let summary = json!({
        "stem": stem,
        "percept": percept.as_ref().map(|p| json!({
            "nodes": p.nodes().len(),
            "groups": p.gestalt_groups.len(),
            "encodings": p.encodings.len(),
            "connectors": p.connectors.len(),
        })),
        "plan": plan.as_ref().map(|p| json!({
            "regions": p.regions.len(),
            "elements": p.elements.len(),
            "connects": p.connects().count(),
            "constraints": p.constraints.len(),
        })),
        "rounds": rounds,
        "t_star": result.as_ref().and_then(|r| r.trace.t_star),
        "valid": result.as_ref().map(|r| r.valid),
        "fallback": result.as_ref().map(|r| r.fallback),
        "tokens": result.as_ref().map(|r| r.total_usage.total()),
        "skeleton": skeleton,
    });
    if json {
        print_json(&summary);
        return Ok(SUCCESS);
    }
    println!("run {stem}");
    if let Some(p) = &percept {
        println!("  percept: {} nodes, {} groups, {} connectors", p.nodes().len(), p.gestalt_groups.len(), p.connectors.len());
    }
    if let Some(p) = &plan {
        println!("  plan: {} regions, {} elements, {} constraints", p.regions.len(), p.elements.len(), p.constraints.len());
    }
    if let Some(r) = &result {
        for round in &r.trace.rounds {
            let codes: Vec<&str> = round.verdict.errors().map(|f| f.code.as_str()).collect();
            let status = if round.verdict.is_valid() { "valid".to_string() } else { format!("invalid [{}]", codes.join(", ")) };
            println!("  round {}: {status}, {} tokens", round.t, round.usage.total());
        }
        let t_star = r.trace.t_star.map_or("none".to_string(), |t| t.to_string());
        println!("  t* = {t_star}, valid = {}, fallback = {}, {} tokens", r.valid, r.fallback, r.total_usage.total());
    }
    if let Some(out) = skeleton {
        println!("  skeleton written to {}", out.display());
    }
    Ok(SUCCESS)
}
