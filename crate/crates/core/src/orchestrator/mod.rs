//! Drives a model through perception, planning, code generation and
//! verifier-guided refinement.

mod candidate;
mod client;
mod http;
mod image;
mod pipeline;
mod templates;

pub use candidate::{extract_candidate, join_continuation, response_truncated, Candidate, CandidateSource};
pub use client::{Completion, CompletionRequest, ModelClient, ModelError, ScriptedClient, Usage};
pub use http::{parse_response, HttpClient, HttpClientConfig, API_KEY_ENV};
pub use image::{ImageError, InputDiagram};
pub use pipeline::{
    run_pipeline, run_stage1, run_stage2, CallRecord, IrPair, Phase, PipelineConfig, PipelineError, PipelineResult, RefinementTrace, Round,
    Stage1Output,
};
pub use templates::{PromptTemplate, TemplateError, TemplateId, TemplateSet, IMAGE_PLACEHOLDER, SLOTS};
