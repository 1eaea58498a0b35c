//! Boundary to the perceptual-metrics service.
//!
//! Job: `{"pairs": [{"id", "candidate_png", "reference_png"}]}`.
//! Response: `{"scores": [{"id", "clip", "dino", "aesthetic"}], "fid": f64 | null}`.
//! A command backend is run as `<program> --job <job.json> --out <resp.json>`;
//! an HTTP backend receives the job as the body of a POST.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPair {
    pub id: String,
    #[serde(alias = "candidate_png_path")]
    pub candidate_png: PathBuf,
    #[serde(alias = "reference_png_path")]
    pub reference_png: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricJob {
    pub pairs: Vec<MetricPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub id: String,
    #[serde(default)]
    pub clip: Option<f64>,
    #[serde(default)]
    pub dino: Option<f64>,
    #[serde(default)]
    pub aesthetic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricResponse {
    #[serde(alias = "per_pair")]
    pub scores: Vec<PairScores>,
    #[serde(default)]
    pub fid: Option<f64>,
    /// Model identifiers the service reports, passed through verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Value>,
}

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("metrics i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot start metrics command {program}: {source}")]
    Spawn { program: PathBuf, source: std::io::Error },
    #[error("metrics command exited with {code:?}: {stderr}")]
    ExitStatus { code: Option<i32>, stderr: String },
    #[error("metrics endpoint: {0}")]
    Http(String),
    #[error("malformed metrics response: {0}")]
    Decode(String),
    #[error("metrics response names unknown pair '{0}'")]
    UnknownId(String),
}

pub trait MetricsBackend: Send + Sync {
    /// `work_dir` is a scratch directory owned by this job.
    fn score(&self, job: &MetricJob, work_dir: &Path) -> Result<MetricResponse, MetricsError>;
    fn describe(&self) -> String;
}

pub fn decode_response(text: &str, job: &MetricJob) -> Result<MetricResponse, MetricsError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let resp: MetricResponse =
        serde_path_to_error::deserialize(de).map_err(|e| MetricsError::Decode(format!("{}: {}", e.path(), e.inner())))?;
    let ids: HashSet<&str> = job.pairs.iter().map(|p| p.id.as_str()).collect();
    if let Some(bad) = resp.scores.iter().find(|s| !ids.contains(s.id.as_str())) {
        return Err(MetricsError::UnknownId(bad.id.clone()));
    }
    Ok(resp)
}

#[derive(Debug, Clone)]
pub struct CommandBackend {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl CommandBackend {
    pub fn new(program: impl Into<PathBuf>) -> CommandBackend {
        CommandBackend { program: program.into(), args: Vec::new() }
    }
}

impl MetricsBackend for CommandBackend {
    fn score(&self, job: &MetricJob, work_dir: &Path) -> Result<MetricResponse, MetricsError> {
        std::fs::create_dir_all(work_dir)?;
        let job_path = work_dir.join("job.json");
        let out_path = work_dir.join("response.json");
        std::fs::write(&job_path, serde_json::to_vec_pretty(job).expect("job serializes"))?;
        let _ = std::fs::remove_file(&out_path);
        let output = Command::new(&self.program)
            .args(&self.args)
            .arg("--job")
            .arg(&job_path)
            .arg("--out")
            .arg(&out_path)
            .output()
            .map_err(|source| MetricsError::Spawn { program: self.program.clone(), source })?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr).chars().take(2000).collect();
            return Err(MetricsError::ExitStatus { code: output.status.code(), stderr });
        }
        decode_response(&std::fs::read_to_string(&out_path)?, job)
    }

    fn describe(&self) -> String {
        format!("command:{}", self.program.display())
    }
}

#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub url: String,
    pub timeout: Duration,
}

impl HttpBackend {
    pub fn new(url: impl Into<String>) -> HttpBackend {
        HttpBackend { url: url.into(), timeout: Duration::from_secs(600) }
    }
}

impl MetricsBackend for HttpBackend {
    fn score(&self, job: &MetricJob, _work_dir: &Path) -> Result<MetricResponse, MetricsError> {
        let agent: ureq::Agent =
            ureq::Agent::config_builder().timeout_global(Some(self.timeout)).http_status_as_error(false).build().into();
        let mut resp = agent.post(&self.url).send_json(job).map_err(|e| MetricsError::Http(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp.body_mut().read_to_string().map_err(|e| MetricsError::Http(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(MetricsError::Http(format!("status {status}: {}", text.chars().take(500).collect::<String>())));
        }
        decode_response(&text, job)
    }

    fn describe(&self) -> String {
        format!("endpoint:{}", self.url)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job() -> MetricJob {
        MetricJob { pairs: vec![MetricPair { id: "a".into(), candidate_png: "c.png".into(), reference_png: "r.png".into() }] }
    }

    #[test]
    fn job_field_names() {
        let v = serde_json::to_value(job()).unwrap();
        assert_eq!(v, serde_json::json!({"pairs": [{"id": "a", "candidate_png": "c.png", "reference_png": "r.png"}]}));
    }

    #[test]
    fn response_decoding() {
        let r = decode_response(r#"{"scores":[{"id":"a","clip":0.9,"dino":0.8,"aesthetic":5.1}],"fid":null}"#, &job()).unwrap();
        assert_eq!(r.scores[0].clip, Some(0.9));
        assert_eq!(r.fid, None);
        let r = decode_response(r#"{"per_pair":[{"id":"a","clip":1.0}],"fid":3.5}"#, &job()).unwrap();
        assert_eq!((r.scores[0].dino, r.fid), (None, Some(3.5)));
        assert!(matches!(decode_response(r#"{"scores":[{"id":"zz"}]}"#, &job()), Err(MetricsError::UnknownId(_))));
        assert!(matches!(decode_response("nope", &job()), Err(MetricsError::Decode(_))));
    }
}
