//! Prompt templates with `{slot}` placeholders.
//!
//! The defaults are compiled in from `assets/prompts`; a directory holding
//! files of the same names overrides them at run time.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateId {
    PerceptThought,
    HierarchyThought,
    CodeThought,
    RefineThought,
}

impl TemplateId {
    pub const ALL: [TemplateId; 4] =
        [TemplateId::PerceptThought, TemplateId::HierarchyThought, TemplateId::CodeThought, TemplateId::RefineThought];

    pub fn file_name(self) -> &'static str {
        match self {
            TemplateId::PerceptThought => "percept.txt",
            TemplateId::HierarchyThought => "hierarchy.txt",
            TemplateId::CodeThought => "code.txt",
            TemplateId::RefineThought => "refine.txt",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            TemplateId::PerceptThought => include_str!("../../assets/prompts/percept.txt"),
            TemplateId::HierarchyThought => include_str!("../../assets/prompts/hierarchy.txt"),
            TemplateId::CodeThought => include_str!("../../assets/prompts/code.txt"),
            TemplateId::RefineThought => include_str!("../../assets/prompts/refine.txt"),
        }
    }
}

/// Slot names a template may use.
pub const SLOTS: [&str; 5] = ["image", "percept_json", "plan_json", "prev_xml", "feedback"];

/// Text bound to `{image}`; the image itself travels as a separate part.
pub const IMAGE_PLACEHOLDER: &str = "[The diagram image is attached to this message.]";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template {template:?} uses unknown slot {{{slot}}}")]
    UnknownSlot { template: TemplateId, slot: String },
    #[error("template {template:?} slot {{{slot}}} is not bound")]
    UnboundSlot { template: TemplateId, slot: String },
    #[error("cannot read template {path}: {detail}")]
    Io { path: String, detail: String },
}

fn slot_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{([a-z_]+)\}").expect("static regex"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub id: TemplateId,
    pub version: String,
    pub text: String,
}

impl PromptTemplate {
    /// Parses template text. An optional first line `version: X` sets the
    /// version; every `{slot}` must be one of [`SLOTS`].
    pub fn parse(id: TemplateId, source: &str) -> Result<PromptTemplate, TemplateError> {
        let (version, text) = match source.split_once('\n') {
            Some((first, rest)) if first.starts_with("version:") => (first["version:".len()..].trim().to_string(), rest),
            _ => ("unversioned".to_string(), source),
        };
        let template = PromptTemplate { id, version, text: text.to_string() };
        if let Some(slot) = template.slots().into_iter().find(|s| !SLOTS.contains(&s.as_str())) {
            return Err(TemplateError::UnknownSlot { template: id, slot });
        }
        Ok(template)
    }

    pub fn slots(&self) -> BTreeSet<String> {
        slot_pattern().captures_iter(&self.text).map(|c| c[1].to_string()).collect()
    }

    /// Substitutes every slot. Bound values are inserted verbatim and never
    /// re-scanned for slots.
    pub fn render(&self, bindings: &[(&str, &str)]) -> Result<String, TemplateError> {
        if let Some(slot) = self.slots().into_iter().find(|s| !bindings.iter().any(|(k, _)| k == s)) {
            return Err(TemplateError::UnboundSlot { template: self.id, slot });
        }
        Ok(slot_pattern()
            .replace_all(&self.text, |c: &regex::Captures<'_>| {
                bindings.iter().find(|(k, _)| *k == &c[1]).map(|(_, v)| v.to_string()).unwrap_or_default()
            })
            .into_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateSet {
    templates: Vec<PromptTemplate>,
}

impl TemplateSet {
    pub fn builtin() -> TemplateSet {
        let templates =
            TemplateId::ALL.iter().map(|id| PromptTemplate::parse(*id, id.builtin()).expect("built-in templates are valid")).collect();
        TemplateSet { templates }
    }

    /// Built-ins, with any `<dir>/<id>.txt` file replacing its default.
    pub fn load(dir: &Path) -> Result<TemplateSet, TemplateError> {
        let mut set = TemplateSet::builtin();
        for t in &mut set.templates {
            let path = dir.join(t.id.file_name());
            if path.exists() {
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| TemplateError::Io { path: path.display().to_string(), detail: e.to_string() })?;
                *t = PromptTemplate::parse(t.id, &text)?;
            }
        }
        Ok(set)
    }

    pub fn get(&self, id: TemplateId) -> &PromptTemplate {
        self.templates.iter().find(|t| t.id == id).expect("all ids present")
    }
}

impl Default for TemplateSet {
    fn default() -> Self {
        TemplateSet::builtin()
    }
}
