//! Core library of the diagram-to-mxGraph pipeline.
//!
//! The XML model and verifier gate every generated document, the renderer
//! turns models into images, the planning IR carries the staged reasoning
//! between model calls, and the evaluation harness scores whole runs.

pub mod complexity;
pub mod diagnostics;
pub mod eval;
pub mod fence;
pub mod ir;
pub mod mxgraph;
pub mod orchestrator;
pub mod render;
pub mod verifier;
pub mod xml;
