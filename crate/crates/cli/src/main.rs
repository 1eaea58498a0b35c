mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Reconstruct diagram images as editable mxGraph XML, and inspect, render
/// and score the results.
#[derive(Debug, Parser)]
#[command(name = "dwt", version)]
pub struct Cli {
    /// Settings file; defaults to $DWT_CONFIG, then ./dwt.toml when present.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Machine-readable output on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert a diagram image into mxGraph XML.
    Convert(ConvertArgs),
    /// Check an mxGraph file; exit 1 when it is invalid.
    Validate { file: PathBuf },
    /// Render an mxGraph file to SVG or PNG.
    Render {
        file: PathBuf,
        /// Output path; the extension picks the format (.svg or .png).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        scale: Option<f64>,
    },
    /// Score visual complexity and assign a difficulty band.
    Analyze { file: PathBuf },
    /// Run a manifest of diagrams through the pipeline and write a report.
    Benchmark(BenchmarkArgs),
    /// Summarize the trace of a conversion run.
    Ir {
        /// Trace directory written by `convert --trace-dir`.
        dir: PathBuf,
        /// Trace file stem; needed only when the directory holds several runs.
        #[arg(long)]
        stem: Option<String>,
        /// Also write the plan's deterministic skeleton to this file.
        #[arg(long, value_name = "FILE")]
        skeleton: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub model: Option<String>,
    /// OpenAI-compatible API root; `/chat/completions` is appended.
    #[arg(long)]
    pub base_url: Option<String>,
    /// Refinement rounds after the first generation.
    #[arg(long = "max-refine", value_name = "N")]
    pub max_refine: Option<usize>,
    #[arg(long)]
    pub retries: Option<usize>,
    /// Replay canned replies instead of calling a model: a script file, or a
    /// directory of `<name>.script.json` files.
    #[arg(long, value_name = "PATH")]
    pub scripted: Option<PathBuf>,
    /// Fall back to the plan skeleton when no round validates.
    #[arg(long)]
    pub fallback_skeleton: bool,
    /// Attach the image to every call, not only the first.
    #[arg(long)]
    pub reattach_image: bool,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    pub image: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_name = "DIR")]
    pub trace_dir: Option<PathBuf>,
    /// Write the XML here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    pub manifest: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Report directory.
    #[arg(long, default_value = "dwt-benchmark")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Perceptual metrics service URL.
    #[arg(long, value_name = "URL", conflicts_with = "metrics_cmd")]
    pub metrics_endpoint: Option<String>,
    /// Perceptual metrics program, run with `--job FILE --out FILE`.
    #[arg(long, value_name = "PATH")]
    pub metrics_cmd: Option<PathBuf>,
    /// Extra argument for the metrics program; repeatable.
    #[arg(long = "metrics-arg", value_name = "ARG", requires = "metrics_cmd", allow_hyphen_values = true)]
    pub metrics_args: Vec<String>,
    /// Exit 1 when overall validity falls below this fraction.
    #[arg(long, default_value_t = 0.0)]
    pub min_validity: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("dwt: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
