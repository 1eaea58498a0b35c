//! One PASS/FAIL line per acceptance criterion; exits nonzero on any failure.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use dwt_core::complexity::{classify, profile, Difficulty};
use dwt_core::eval::{
    aggregate, assignment_weight, exact_assignment, node_views, run_benchmark, weight_matrix, write_report, BenchmarkManifest,
    BenchmarkOptions, ManifestEntry, MetricReport,
};
use dwt_core::ir::{plan_to_skeleton, Axis, Constraint};
use dwt_core::mxgraph::{parse_document, serialize_document, Cell, Geometry, GraphModel, StyleMap};
use dwt_core::orchestrator::{run_pipeline, ModelClient, PipelineConfig, ScriptedClient};
use dwt_core::render::{render_svg, RenderOptions};
use dwt_core::verifier::{verify, Status};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn round_trip() -> Outcome {
    const N: u64 = 64;
    let start = Instant::now();
    for seed in 0..N {
        let doc = common::random_document(&mut common::rng(seed));
        let back = parse_document(&serialize_document(&doc)).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure!(back == doc, "seed {seed}: round trip changed the document");
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(5), "{N} documents took {took:?}");
    Ok(format!("{N} documents in {} ms", took.as_millis()))
}

fn verifier_taxonomy() -> Outcome {
    let invalid = common::invalid_fixtures();
    ensure!(invalid.len() >= 8, "only {} invalid classes", invalid.len());
    for (class, code, xml) in &invalid {
        let v = verify(xml);
        let codes: Vec<&str> = v.errors().map(|f| f.code.as_str()).collect();
        ensure!(v.status == Status::Invalid && codes == [code.as_str()], "{class}: expected [{code}], got {codes:?}");
    }
    let valid = common::valid_fixtures();
    ensure!(valid.len() >= 20, "only {} valid fixtures", valid.len());
    for (name, xml) in &valid {
        let v = verify(xml);
        ensure!(v.status == Status::Valid && v.errors().count() == 0, "{name}: {:?}", v.findings);
    }
    Ok(format!("{} invalid classes, {} valid fixtures", invalid.len(), valid.len()))
}

fn loop_semantics() -> Outcome {
    let cfg = PipelineConfig::default();
    ensure!(cfg.t_refine == 3, "default t_refine is {}", cfg.t_refine);
    let run = |script: Vec<String>| {
        let client = common::scripted(script);
        let result = run_pipeline(&common::tiny_image(), &client, &cfg).map_err(|e| e.to_string())?;
        Ok::<_, String>((result, client))
    };

    let (r, c) = run(common::k_error_script(0))?;
    ensure!(c.call_count() - 2 == 1 && r.valid && r.trace.t_star == Some(0), "round-0 valid: {} stage-2 calls", c.call_count() - 2);

    for k in 1..=3 {
        let (r, _) = run(common::k_error_script(k))?;
        ensure!(r.valid && r.trace.t_star == Some(k), "k = {k}: t_star {:?}", r.trace.t_star);
    }

    let mut never = vec![common::percept_reply(), common::plan_reply()];
    never.extend((0..6).map(|_| common::xml_reply(&common::broken_three_boxes(1))));
    let (r, c) = run(never)?;
    ensure!(
        c.call_count() - 2 == 4 && !r.valid && r.trace.t_star.is_none(),
        "never valid: {} stage-2 calls, valid={}",
        c.call_count() - 2,
        r.valid
    );

    let fingerprint = || {
        run(common::k_error_script(2)).map(|(r, c)| {
            (r.final_xml, r.trace.t_star, r.trace.rounds.iter().map(|x| x.feedback.clone()).collect::<Vec<_>>(), c.requests())
        })
    };
    let first = fingerprint()?;
    for i in 1..10 {
        ensure!(fingerprint()? == first, "repeat {i} diverged");
    }
    Ok("t_star 0..=3, 4-call cap, 10 identical repeats".into())
}

fn skeleton_realizability() -> Outcome {
    let mut aligns = 0;
    for seed in 0..100 {
        let plan = common::random_plan(&mut common::rng(seed));
        let doc = plan_to_skeleton(&plan, &Default::default()).map_err(|e| format!("seed {seed}: {e}"))?;
        let v = verify(&serialize_document(&doc));
        ensure!(v.is_valid(), "seed {seed}: {:?}", v.findings);
        ensure!(
            doc.model.edge_count() == plan.connects().count(),
            "seed {seed}: {} edges for {} connects",
            doc.model.edge_count(),
            plan.connects().count()
        );
        for c in &plan.constraints {
            if let Constraint::Align { a, b, axis } = c {
                let geo =
                    |id: &str| doc.model.cell(id).and_then(|c| c.geometry.clone()).ok_or(format!("seed {seed}: {id} has no geometry"));
                let (ga, gb) = (geo(a)?, geo(b)?);
                let equal = match axis {
                    Axis::Horizontal => ga.y == gb.y,
                    Axis::Vertical => ga.x == gb.x,
                };
                ensure!(equal, "seed {seed}: {c:?} not realized");
                aligns += 1;
            }
        }
    }
    Ok(format!("100 plans, {aligns} aligns exact"))
}

fn renderer_geometry() -> Outcome {
    let opts = RenderOptions::default();
    let fixtures = common::valid_fixtures();
    ensure!(fixtures.len() >= 25, "only {} fixtures", fixtures.len());
    let golden = common::fixtures().join("golden");
    let mut endpoints = 0;
    for (name, xml) in &fixtures {
        let model = parse_document(xml).map_err(|e| format!("{name}: {e}"))?.model;
        let svg = render_svg(&model, &opts).map_err(|e| format!("{name}: {e}"))?;
        let counts = common::svg_counts(&svg);
        ensure!(counts == (model.vertex_count(), model.edge_count()), "{name}: svg counts {counts:?}");
        endpoints += common::check_edge_endpoints(&model, &svg, &opts).map_err(|e| format!("{name}: {e}"))?;
        ensure!(render_svg(&model, &opts).ok().as_deref() == Some(svg.as_str()), "{name}: second render differs");
        let frozen = std::fs::read_to_string(golden.join(format!("{name}.svg"))).map_err(|e| format!("{name}: {e}"))?;
        ensure!(frozen == svg, "{name}: differs from golden");
    }
    Ok(format!("{} fixtures, {endpoints} endpoints", fixtures.len()))
}

fn complexity_monotonicity() -> Outcome {
    for seed in 0..200u64 {
        let model = common::random_document(&mut common::rng(seed)).model;
        let base = profile(&model);
        let ids: Vec<String> = model.vertices().map(|v| v.id.clone()).collect();

        if let (Some(s), Some(t)) = (ids.first(), ids.last()) {
            let mut m = model.clone();
            m.cells.push(Cell::edge("acc-edge", Some(s.clone()), Some(t.clone()), "", StyleMap::new()));
            ensure!(profile(&m).connection >= base.connection, "seed {seed}: edge lowered connection");

            let mut m = model.clone();
            let i = m.cells.iter().position(|c| &c.id == s).unwrap();
            m.cells[i].style.set("labelBorderColor", "#0a0b0c");
            ensure!(profile(&m).color >= base.color, "seed {seed}: color lowered color score");
        }

        let mut m = model.clone();
        m.cells.push(Cell::vertex("acc-label", "an extra label", StyleMap::new(), Geometry::rect(0.0, 0.0, 10.0, 10.0)));
        ensure!(profile(&m).text >= base.text, "seed {seed}: label lowered text score");
    }
    let bands = [(1.99, Difficulty::Easy), (2.0, Difficulty::Medium), (3.49, Difficulty::Medium), (3.5, Difficulty::Hard)];
    for (score, want) in bands {
        let got = classify(&[score; 5]);
        ensure!(got == want, "mean {score}: {got:?}, expected {want:?}");
    }
    Ok("200 models, bands at 2.0 and 3.5".into())
}

fn small_model(r: &mut impl Rng) -> GraphModel {
    const WORDS: [&str; 6] = ["load", "train", "eval", "store", "plot", "fit"];
    const SHAPES: [&str; 3] = ["", "ellipse;", "rhombus;"];
    let mut m = GraphModel::empty();
    for i in 0..4 {
        let label = format!("{} {}", WORDS[r.random_range(0..WORDS.len())], r.random_range(0..3));
        let geo = Geometry::rect(r.random_range(0..600) as f64, r.random_range(0..400) as f64, 100.0, 50.0);
        m.cells.push(Cell::vertex(format!("v{i}"), label, StyleMap::parse_lossy(SHAPES[r.random_range(0..3)]), geo));
    }
    m
}

fn similarity_exactness() -> Outcome {
    const N: usize = 64;
    let mut r = common::rng(2024);
    for case in 0..N {
        let (a, b) = (small_model(&mut r), small_model(&mut r));
        let w = weight_matrix(&node_views(&a), &node_views(&b));
        let got = assignment_weight(&w, &exact_assignment(&w, 4));
        let want = common::brute_force_best(&w, 4);
        ensure!((got - want).abs() < 1e-9, "case {case}: {got} vs optimum {want}");
    }
    Ok(format!("{N} instances match the 4! optimum"))
}

fn hermetic_benchmark() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = BenchmarkManifest::load(&common::write_bench(dir.path(), 5)).map_err(|e| e.to_string())?;
    let out = dir.path().join("out");
    let factory = |entry: &ManifestEntry| {
        ScriptedClient::load(&dir.path().join(format!("{}.script.json", entry.id)))
            .map(|c| Box::new(c) as Box<dyn ModelClient>)
            .map_err(|e| e.to_string())
    };
    let report = run_benchmark(&manifest, &BenchmarkOptions { jobs: 2, ..BenchmarkOptions::new(&out) }, &factory, None);
    ensure!(report.entries.len() == 5, "{} entries", report.entries.len());
    for e in &report.entries {
        ensure!(e.valid && e.error.is_none(), "{}: {:?}", e.id, e.error);
        let combined = e.structural.map(|s| s.combined);
        ensure!(combined == Some(1.0), "{}: structural {combined:?}", e.id);
    }
    let all = report.aggregates.last().ok_or("no aggregates")?;
    ensure!(all.validity == Some(1.0) && all.structural == Some(1.0), "aggregate {all:?}");
    ensure!(report.metrics_backend.is_none() && !out.join("metrics").exists(), "a metrics backend was involved");

    write_report(&report, &out).map_err(|e| e.to_string())?;
    let json = std::fs::read_to_string(out.join("report.json")).map_err(|e| e.to_string())?;
    let back: MetricReport = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    ensure!(aggregate(&back.entries) == back.aggregates, "aggregates not recomputable from entries");
    ensure!(Path::new(&out.join("report.csv")).is_file(), "no csv");
    Ok("5/5 valid, structural 1.0, aggregates recomputed".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("round-trip", round_trip),
        ("verifier-taxonomy", verifier_taxonomy),
        ("refinement-loop", loop_semantics),
        ("skeleton-realizability", skeleton_realizability),
        ("renderer-geometry", renderer_geometry),
        ("complexity-monotonicity", complexity_monotonicity),
        ("similarity-exactness", similarity_exactness),
        ("hermetic-benchmark", hermetic_benchmark),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or("panic".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
