use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::percept::{schema_tag, PerceptReport};
use super::{decode, IrError};
use crate::mxgraph::{StyleCatalog, StyleMap};
use crate::render::ShapeKind;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ElementClass {
    Process,
    Decision,
    Entity,
    DataStore,
    Annotation,
    Container,
    Other(String),
}

impl ElementClass {
    pub fn name(&self) -> &str {
        match self {
            ElementClass::Process => "Process",
            ElementClass::Decision => "Decision",
            ElementClass::Entity => "Entity",
            ElementClass::DataStore => "DataStore",
            ElementClass::Annotation => "Annotation",
            ElementClass::Container => "Container",
            ElementClass::Other(text) => text,
        }
    }

    pub fn parse(text: &str) -> ElementClass {
        match text.to_ascii_lowercase().replace(['_', ' '], "").as_str() {
            "process" => ElementClass::Process,
            "decision" => ElementClass::Decision,
            "entity" => ElementClass::Entity,
            "datastore" => ElementClass::DataStore,
            "annotation" => ElementClass::Annotation,
            "container" => ElementClass::Container,
            _ => ElementClass::Other(text.to_string()),
        }
    }
}

impl Serialize for ElementClass {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ElementClass {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(ElementClass::parse(&String::deserialize(d)?))
    }
}

/// Style used for elements whose role the plan does not define.
pub fn class_default_style(class: &ElementClass) -> StyleMap {
    StyleMap::parse_lossy(match class {
        ElementClass::Process => "rounded=1;whiteSpace=wrap;html=1;",
        ElementClass::Decision => "rhombus;whiteSpace=wrap;html=1;",
        ElementClass::DataStore => "shape=cylinder;whiteSpace=wrap;html=1;",
        ElementClass::Annotation => "text;html=1;",
        ElementClass::Container => "container=1;dashed=1;html=1;",
        ElementClass::Entity | ElementClass::Other(_) => "whiteSpace=wrap;html=1;",
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub bounds_hint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    #[serde(rename = "class")]
    pub class_label: ElementClass,
    #[serde(default)]
    pub text: String,
    pub region: String,
    #[serde(default)]
    pub style_role: String,
    /// Hierarchy node of the perceptual report this element realizes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percept_ref: Option<String>,
}

impl Element {
    /// Declared role, or the lowercased class name when none is given.
    pub fn role(&self) -> String {
        if self.style_role.is_empty() {
            self.class_label.name().to_ascii_lowercase()
        } else {
            self.style_role.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    #[serde(alias = "Horizontal", alias = "x")]
    Horizontal,
    #[serde(alias = "Vertical", alias = "y")]
    Vertical,
}

/// `Align { a, b, Horizontal }` puts `a` and `b` on one row with `a` to the
/// left; `Vertical` puts them in one column with `a` above.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Constraint {
    Align {
        a: String,
        b: String,
        axis: Axis,
    },
    Connect {
        from: String,
        to: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label: Option<String>,
    },
    Layer {
        element: String,
        z: i64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPlan {
    #[serde(default = "schema_tag")]
    pub schema: String,
    pub regions: Vec<Region>,
    pub elements: Vec<Element>,
    #[serde(default)]
    pub constraints: Vec<Constraint>,
    #[serde(default, skip_serializing_if = "catalog_is_empty")]
    pub styles: StyleCatalog,
}

fn catalog_is_empty(c: &StyleCatalog) -> bool {
    c.roles.is_empty()
}

impl LayoutPlan {
    pub fn element(&self, id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn connects(&self) -> impl Iterator<Item = (&str, &str, Option<&str>)> {
        self.constraints.iter().filter_map(|c| match c {
            Constraint::Connect { from, to, label } => Some((from.as_str(), to.as_str(), label.as_deref())),
            _ => None,
        })
    }

    pub fn validate(&self) -> Result<(), IrError> {
        let mut regions = HashSet::new();
        for (i, r) in self.regions.iter().enumerate() {
            if r.id.is_empty() || !regions.insert(r.id.as_str()) {
                return Err(IrError::schema(format!("regions[{i}].id"), format!("empty or duplicate id '{}'", r.id)));
            }
        }
        let mut elements = HashSet::new();
        for (i, e) in self.elements.iter().enumerate() {
            if e.id.is_empty() || !elements.insert(e.id.as_str()) {
                return Err(IrError::schema(format!("elements[{i}].id"), format!("empty or duplicate id '{}'", e.id)));
            }
            if !regions.contains(e.region.as_str()) {
                return Err(IrError::MissingRegion(e.region.clone()));
            }
        }
        for c in &self.constraints {
            let operands: Vec<&String> = match c {
                Constraint::Align { a, b, .. } => vec![a, b],
                Constraint::Connect { from, to, .. } => vec![from, to],
                Constraint::Layer { element, .. } => vec![element],
            };
            if let Some(missing) = operands.into_iter().find(|id| !elements.contains(id.as_str())) {
                return Err(IrError::DanglingRef(missing.clone()));
            }
        }
        Ok(())
    }

    /// Style catalog covering every element role: the plan's own styles
    /// (minus those the renderer cannot draw) plus class defaults.
    pub fn resolved_catalog(&self) -> (StyleCatalog, Vec<IrWarning>) {
        let mut warnings = Vec::new();
        let mut catalog = StyleCatalog::new();
        for (role, style) in &self.styles.roles {
            if ShapeKind::from_token(style.shape_token()).is_none() && !style.is_group_frame() {
                warnings.push(IrWarning::UnsupportedStyle { role: role.clone(), shape: style.shape_token().to_string() });
            } else {
                catalog.insert(role.clone(), style.clone());
            }
        }
        for e in &self.elements {
            let role = e.role();
            if !catalog.contains(&role) {
                catalog.insert(role, class_default_style(&e.class_label));
            }
        }
        (catalog, warnings)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IrWarning {
    /// A perceived connector has no Connect constraint between the elements
    /// realizing its endpoints.
    DroppedConnector { from: String, to: String },
    /// A plan style the renderer cannot draw; elements fall back to their
    /// class default.
    UnsupportedStyle { role: String, shape: String },
}

impl fmt::Display for IrWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrWarning::DroppedConnector { from, to } => write!(f, "perceived connector {from} -> {to} has no connect constraint"),
            IrWarning::UnsupportedStyle { role, shape } => write!(f, "style role '{role}' uses unsupported shape '{shape}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLayout {
    pub plan: LayoutPlan,
    pub catalog: StyleCatalog,
    pub warnings: Vec<IrWarning>,
}

/// Elements realizing percept node `r`: by `percept_ref`, else by id, else
/// by matching text to the node label.
fn realizing<'a>(plan: &'a LayoutPlan, percept: &PerceptReport, r: &str) -> Vec<&'a str> {
    let by_ref: Vec<&str> = plan.elements.iter().filter(|e| e.percept_ref.as_deref() == Some(r)).map(|e| e.id.as_str()).collect();
    if !by_ref.is_empty() {
        return by_ref;
    }
    if let Some(e) = plan.element(r) {
        return vec![e.id.as_str()];
    }
    let label = percept.node(r).map(|n| n.label.trim().to_lowercase()).unwrap_or_default();
    if label.is_empty() {
        return Vec::new();
    }
    plan.elements.iter().filter(|e| e.text.trim().to_lowercase() == label).map(|e| e.id.as_str()).collect()
}

/// Decodes and validates the layout plan in a raw model response. Percept
/// connectors without a matching Connect are reported as warnings.
pub fn parse_layout_response(model_text: &str, context: &PerceptReport) -> Result<ParsedLayout, IrError> {
    let plan: LayoutPlan = decode(model_text)?;
    plan.validate()?;
    if let Some(bad) = plan.elements.iter().find_map(|e| e.percept_ref.as_ref().filter(|r| context.node(r).is_none())) {
        return Err(IrError::DanglingRef(bad.clone()));
    }
    let (catalog, mut warnings) = plan.resolved_catalog();
    let pairs: HashSet<(&str, &str)> = plan.connects().map(|(f, t, _)| (f, t)).collect();
    for c in &context.connectors {
        let froms = realizing(&plan, context, &c.from);
        let tos = realizing(&plan, context, &c.to);
        let kept = froms.iter().any(|f| tos.iter().any(|t| pairs.contains(&(*f, *t)) || (!c.directed && pairs.contains(&(*t, *f)))));
        if !kept {
            warnings.push(IrWarning::DroppedConnector { from: c.from.clone(), to: c.to.clone() });
        }
    }
    Ok(ParsedLayout { plan, catalog, warnings })
}
