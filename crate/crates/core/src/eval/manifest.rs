//! Benchmark manifests: `{"entries": [{"id", "image_path", "reference_xml_path", "difficulty"?}]}`.
//! Relative paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::complexity::Difficulty;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    #[serde(alias = "image")]
    pub image_path: PathBuf,
    #[serde(alias = "reference")]
    pub reference_xml_path: PathBuf,
    /// Overrides the band computed from the reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BenchmarkManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed manifest: {0}")]
    Parse(String),
    #[error("duplicate entry id '{0}'")]
    DuplicateId(String),
    #[error("entry '{id}': {path} does not exist")]
    MissingPath { id: String, path: PathBuf },
}

impl BenchmarkManifest {
    /// Loads, resolves paths, and checks ids and paths.
    pub fn load(path: &Path) -> Result<BenchmarkManifest, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io { path: path.to_path_buf(), source })?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let mut manifest: BenchmarkManifest =
            serde_path_to_error::deserialize(de).map_err(|e| ManifestError::Parse(format!("{}: {}", e.path(), e.inner())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for e in &mut manifest.entries {
            e.image_path = base.join(&e.image_path);
            e.reference_xml_path = base.join(&e.reference_xml_path);
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<(), ManifestError> {
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(ManifestError::DuplicateId(e.id.clone()));
            }
            for p in [&e.image_path, &e.reference_xml_path] {
                if !p.exists() {
                    return Err(ManifestError::MissingPath { id: e.id.clone(), path: p.clone() });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_relative_paths_and_rejects_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.png"), b"x").unwrap();
        std::fs::write(dir.path().join("a.xml"), b"x").unwrap();
        let path = dir.path().join("m.json");
        std::fs::write(&path, r#"{"entries":[{"id":"a","image":"a.png","reference":"a.xml","difficulty":"hard"}]}"#).unwrap();
        let m = BenchmarkManifest::load(&path).unwrap();
        assert_eq!(m.entries[0].image_path, dir.path().join("a.png"));
        assert_eq!(m.entries[0].difficulty, Some(Difficulty::Hard));

        std::fs::write(
            &path,
            r#"{"entries":[{"id":"a","image":"a.png","reference":"a.xml"},{"id":"a","image":"a.png","reference":"a.xml"}]}"#,
        )
        .unwrap();
        assert!(matches!(BenchmarkManifest::load(&path), Err(ManifestError::DuplicateId(_))));
        std::fs::write(&path, r#"{"entries":[{"id":"b","image":"b.png","reference":"a.xml"}]}"#).unwrap();
        assert!(matches!(BenchmarkManifest::load(&path), Err(ManifestError::MissingPath { .. })));
    }
}
