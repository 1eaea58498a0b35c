//! Benchmark harness: structural similarity, rank correlation, manifests,
//! the perceptual-metrics boundary and report tables.

mod benchmark;
mod manifest;
mod metrics;
mod report;
mod similarity;
mod stats;

pub use benchmark::{run_benchmark, BenchmarkOptions, ClientFactory};
pub use manifest::{BenchmarkManifest, ManifestEntry, ManifestError};
pub use metrics::{
    decode_response, CommandBackend, HttpBackend, MetricJob, MetricPair, MetricResponse, MetricsBackend, MetricsError, PairScores,
};
pub use report::{aggregate, to_csv, write_report, Aggregate, EntryReport, MetricReport, CSV_HEADER};
pub use similarity::{
    assignment_weight, exact_assignment, greedy_assignment, label_similarity, node_views, pair_weight, structural_similarity,
    weight_matrix, NodeView, StructuralScore, EXACT_LIMIT, MATCH_THRESHOLD, W_EDGE, W_LABEL, W_NODE,
};
pub use stats::{average_ranks, spearman, StatsError};
