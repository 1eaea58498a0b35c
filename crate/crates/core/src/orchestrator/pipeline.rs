use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::candidate::{extract_candidate, join_continuation, response_truncated, CandidateSource};
use super::client::{CompletionRequest, ModelClient, ModelError, Usage};
use super::image::InputDiagram;
use super::templates::{TemplateError, TemplateId, TemplateSet, IMAGE_PLACEHOLDER};
use crate::ir::{parse_layout_response, parse_percept_response, plan_to_skeleton, IrError, LayoutPlan, ParsedLayout, PerceptReport};
use crate::mxgraph::serialize_document;
use crate::verifier::{findings_to_feedback, verify, Verdict};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub templates: TemplateSet,
    /// Refinement rounds allowed after the initial generation.
    pub t_refine: usize,
    /// Extra attempts per stage-one phase when the reply does not parse.
    pub retries: usize,
    /// Continuation requests allowed per round for cut-off replies.
    pub max_continuations: usize,
    pub max_tokens: u32,
    pub temperature: f64,
    pub trace_dir: Option<PathBuf>,
    /// File stem for trace artifacts.
    pub stem: String,
    pub fallback_skeleton: bool,
    /// Attach the input image to every call after the perceptual phase.
    pub reattach_image: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            templates: TemplateSet::builtin(),
            t_refine: 3,
            retries: 2,
            max_continuations: 2,
            max_tokens: 8192,
            temperature: 0.0,
            trace_dir: None,
            stem: "diagram".to_string(),
            fallback_skeleton: false,
            reattach_image: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Percept,
    Hierarchy,
    Code,
    Refine,
}

/// One model call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CallRecord {
    pub phase: Phase,
    /// Refinement round for stage-two calls.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round: Option<usize>,
    /// Retry attempt (stage one) or continuation index (stage two).
    pub attempt: usize,
    pub continuation: bool,
    pub usage: Usage,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parse_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub t: usize,
    pub xml: String,
    pub verdict: Verdict,
    /// Refinement feedback derived from the verdict; empty when valid.
    pub feedback: String,
    pub usage: Usage,
    pub source: CandidateSource,
    pub calls: Vec<CallRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementTrace {
    pub rounds: Vec<Round>,
    /// First round with a valid verdict; no rounds follow it.
    pub t_star: Option<usize>,
    pub t_refine_cap: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrPair {
    pub percept: PerceptReport,
    pub plan: LayoutPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineResult {
    pub final_xml: String,
    pub valid: bool,
    /// The final document is the deterministic skeleton of the plan.
    pub fallback: bool,
    pub trace: RefinementTrace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ir: Option<IrPair>,
    pub stage1_calls: Vec<CallRecord>,
    pub total_usage: Usage,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{phase:?} call failed: {source}")]
    Model { phase: Phase, source: ModelError },
    #[error("{phase:?} reply unusable after {attempts} attempts: {source}")]
    Ir { phase: Phase, attempts: usize, source: IrError },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("cannot write trace file {path}: {detail}")]
    Trace { path: String, detail: String },
}

pub struct Stage1Output {
    pub percept: PerceptReport,
    pub layout: ParsedLayout,
    pub calls: Vec<CallRecord>,
}

fn persist(config: &PipelineConfig, suffix: &str, contents: &str) -> Result<(), PipelineError> {
    let Some(dir) = &config.trace_dir else { return Ok(()) };
    let path: PathBuf = dir.join(format!("{}.{suffix}", config.stem));
    let write = |p: &Path| -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(p, contents)
    };
    write(&path).map_err(|e| PipelineError::Trace { path: path.display().to_string(), detail: e.to_string() })
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("IR types serialize")
}

fn request(config: &PipelineConfig, prompt: String, images: Vec<InputDiagram>) -> CompletionRequest {
    CompletionRequest { prompt, images, max_tokens: config.max_tokens, temperature: config.temperature }
}

/// Calls the model until `parse` accepts the reply, at most `1 + retries`
/// times. Each retry repeats the prompt with the parse error appended.
fn phase_with_retries<T>(
    client: &dyn ModelClient,
    config: &PipelineConfig,
    phase: Phase,
    prompt: &str,
    images: Vec<InputDiagram>,
    calls: &mut Vec<CallRecord>,
    mut parse: impl FnMut(&str) -> Result<T, IrError>,
) -> Result<T, PipelineError> {
    let name = match phase {
        Phase::Percept => "percept",
        _ => "plan",
    };
    let mut current = prompt.to_string();
    for attempt in 0..=config.retries {
        let completion =
            client.complete(&request(config, current.clone(), images.clone())).map_err(|source| PipelineError::Model { phase, source })?;
        persist(config, &format!("{name}.response{attempt}.txt"), &completion.text)?;
        let outcome = parse(&completion.text);
        calls.push(CallRecord {
            phase,
            round: None,
            attempt,
            continuation: false,
            usage: completion.usage,
            parse_error: outcome.as_ref().err().map(ToString::to_string),
        });
        match outcome {
            Ok(value) => return Ok(value),
            Err(err) if attempt == config.retries => {
                return Err(PipelineError::Ir { phase, attempts: attempt + 1, source: err });
            }
            Err(err) => {
                current = format!(
                    "{prompt}\n\nYour previous reply could not be used: {err}. Reply again with a single ```json block that follows the schema exactly."
                );
            }
        }
    }
    unreachable!("loop returns on the last attempt")
}

/// Perceptual report, then layout plan. Both are validated IRs.
pub fn run_stage1(image: &InputDiagram, client: &dyn ModelClient, config: &PipelineConfig) -> Result<Stage1Output, PipelineError> {
    let mut calls = Vec::new();
    let percept_prompt = config.templates.get(TemplateId::PerceptThought).render(&[("image", IMAGE_PLACEHOLDER)])?;
    let percept =
        phase_with_retries(client, config, Phase::Percept, &percept_prompt, vec![image.clone()], &mut calls, parse_percept_response)?;
    persist(config, "percept.json", &to_json(&percept))?;

    let hierarchy_prompt =
        config.templates.get(TemplateId::HierarchyThought).render(&[("percept_json", &to_json(&percept)), ("image", IMAGE_PLACEHOLDER)])?;
    let images = if config.reattach_image { vec![image.clone()] } else { Vec::new() };
    let layout = phase_with_retries(client, config, Phase::Hierarchy, &hierarchy_prompt, images, &mut calls, |text| {
        parse_layout_response(text, &percept)
    })?;
    persist(config, "plan.json", &to_json(&layout.plan))?;
    Ok(Stage1Output { percept, layout, calls })
}

const CONTINUE_PROMPT: &str = "Your previous reply was cut off by the length limit. Continue exactly where it stopped. Do not repeat earlier text and do not add commentary.\n\nThe reply so far ends with:\n";
const CONTINUE_TAIL: usize = 1500;

fn generate_round(
    client: &dyn ModelClient,
    config: &PipelineConfig,
    t: usize,
    prompt: String,
    images: Vec<InputDiagram>,
) -> Result<Round, PipelineError> {
    let phase = if t == 0 { Phase::Code } else { Phase::Refine };
    let mut calls = Vec::new();
    let first = client.complete(&request(config, prompt, images.clone())).map_err(|source| PipelineError::Model { phase, source })?;
    calls.push(CallRecord { phase, round: Some(t), attempt: 0, continuation: false, usage: first.usage, parse_error: None });
    let mut text = first.text;
    let mut continued = 0;
    while continued < config.max_continuations && response_truncated(&text) {
        continued += 1;
        let tail_start = text.char_indices().rev().nth(CONTINUE_TAIL.saturating_sub(1)).map_or(0, |(i, _)| i);
        let prompt = format!("{CONTINUE_PROMPT}{}", &text[tail_start..]);
        let next = client.complete(&request(config, prompt, images.clone())).map_err(|source| PipelineError::Model { phase, source })?;
        calls.push(CallRecord { phase, round: Some(t), attempt: continued, continuation: true, usage: next.usage, parse_error: None });
        text = join_continuation(&text, &next.text);
    }
    persist(config, &format!("round{t}.response.txt"), &text)?;

    let candidate = extract_candidate(&text);
    let verdict = verify(&candidate.xml);
    let mut feedback = String::new();
    if let Some(err) = &candidate.assembly_error {
        feedback.push_str(&format!("The y_doc/y_style/y_node/y_layout/y_edge blocks could not be assembled: {err}\n"));
    }
    if let Ok(text) = findings_to_feedback(&verdict) {
        feedback.push_str(&text);
    }
    Ok(Round { t, xml: candidate.xml, verdict, feedback, usage: calls.iter().map(|c| c.usage).sum(), source: candidate.source, calls })
}

/// Generation then verifier-guided refinement: round 0 generates, rounds
/// 1..=t_refine run only while the latest verdict is invalid.
pub fn run_stage2(
    plan: &LayoutPlan,
    image: &InputDiagram,
    client: &dyn ModelClient,
    config: &PipelineConfig,
) -> Result<RefinementTrace, PipelineError> {
    let images = || if config.reattach_image { vec![image.clone()] } else { Vec::new() };
    let code_prompt =
        config.templates.get(TemplateId::CodeThought).render(&[("plan_json", &to_json(plan)), ("image", IMAGE_PLACEHOLDER)])?;
    let mut rounds = vec![generate_round(client, config, 0, code_prompt, images())?];
    for t in 1..=config.t_refine {
        let prev = rounds.last().expect("round 0 exists");
        if prev.verdict.is_valid() {
            break;
        }
        let prompt = config.templates.get(TemplateId::RefineThought).render(&[
            ("prev_xml", &prev.xml),
            ("feedback", &prev.feedback),
            ("image", IMAGE_PLACEHOLDER),
        ])?;
        rounds.push(generate_round(client, config, t, prompt, images())?);
    }
    let t_star = rounds.iter().position(|r| r.verdict.is_valid());
    Ok(RefinementTrace { rounds, t_star, t_refine_cap: config.t_refine })
}

/// Both stages end to end, persisting IRs, raw replies and the trace when a
/// trace directory is configured.
pub fn run_pipeline(image: &InputDiagram, client: &dyn ModelClient, config: &PipelineConfig) -> Result<PipelineResult, PipelineError> {
    let stage1 = run_stage1(image, client, config)?;
    let trace = run_stage2(&stage1.layout.plan, image, client, config)?;
    let last = trace.rounds.last().expect("stage two has round 0");
    let (mut final_xml, mut valid, mut fallback) = (last.xml.clone(), last.verdict.is_valid(), false);
    if !valid && config.fallback_skeleton {
        if let Ok(doc) = plan_to_skeleton(&stage1.layout.plan, &stage1.layout.catalog) {
            final_xml = serialize_document(&doc);
            valid = verify(&final_xml).is_valid();
            fallback = true;
        }
    }
    let total_usage = stage1.calls.iter().map(|c| c.usage).chain(trace.rounds.iter().map(|r| r.usage)).sum();
    let result = PipelineResult {
        final_xml,
        valid,
        fallback,
        trace,
        ir: Some(IrPair { percept: stage1.percept, plan: stage1.layout.plan }),
        stage1_calls: stage1.calls,
        total_usage,
    };
    persist(config, "trace.json", &to_json(&result))?;
    persist(config, "final.xml", &result.final_xml)?;
    Ok(result)
}
