//! draw.io style strings: `base;key=value;key=value;`.

use std::fmt;

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Default, Eq)]
pub struct StyleMap {
    /// Leading bare token such as `ellipse`, `text` or `group`.
    pub base_shape: Option<String>,
    /// Remaining entries in source order. Bare tokens after the first
    /// segment are kept with a `None` value.
    pub entries: Vec<(String, Option<String>)>,
    pub trailing_semicolon: bool,
}

/// Lint raised while parsing a style string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleLint {
    pub key: String,
    pub kept: String,
    pub dropped: String,
}

impl StyleMap {
    pub fn new() -> Self {
        StyleMap::default()
    }

    /// Parses a style string. Duplicate keys collapse to the last value at
    /// the position of their first occurrence; each collapse yields a lint.
    pub fn parse(style: &str) -> (StyleMap, Vec<StyleLint>) {
        let mut map = StyleMap { trailing_semicolon: style.ends_with(';'), ..StyleMap::default() };
        let mut lints = Vec::new();
        for (idx, segment) in style.split(';').enumerate() {
            if segment.is_empty() {
                continue;
            }
            match segment.split_once('=') {
                None if idx == 0 => map.base_shape = Some(segment.to_string()),
                None => map.entries.push((segment.to_string(), None)),
                Some((key, value)) => {
                    if let Some(slot) = map.entries.iter_mut().find(|(k, v)| k == key && v.is_some()) {
                        let previous = slot.1.replace(value.to_string()).unwrap_or_default();
                        lints.push(StyleLint { key: key.to_string(), kept: value.to_string(), dropped: previous });
                    } else {
                        map.entries.push((key.to_string(), Some(value.to_string())));
                    }
                }
            }
        }
        (map, lints)
    }

    pub fn parse_lossy(style: &str) -> StyleMap {
        StyleMap::parse(style).0
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, v)| k == key && v.is_some()).and_then(|(_, v)| v.as_deref())
    }

    pub fn is_set(&self, key: &str) -> bool {
        self.get(key) == Some("1")
    }

    /// Sets `key`, keeping its position if already present.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, v)| k == key && v.is_some()) {
            Some(slot) => slot.1 = Some(value),
            None => self.entries.push((key.to_string(), Some(value))),
        }
        self.trailing_semicolon = true;
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.set(key, value);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.base_shape.is_none() && self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _)| k.as_str())
    }

    /// Shape token the renderer should draw: explicit `shape=` wins, then the
    /// leading bare token, then `rounded=1`, then plain rectangle.
    pub fn shape_token(&self) -> &str {
        if let Some(shape) = self.get("shape") {
            return shape;
        }
        if let Some(base) = self.base_shape.as_deref() {
            return base;
        }
        if self.is_set("rounded") {
            return "rounded";
        }
        "rectangle"
    }

    /// Marks group/container frames (`group` token, `container=1`).
    pub fn is_group_frame(&self) -> bool {
        self.base_shape.as_deref() == Some("group") || self.get("shape") == Some("group") || self.is_set("container")
    }
}

// The trailing-semicolon flag carries no meaning for an empty style.
impl PartialEq for StyleMap {
    fn eq(&self, other: &Self) -> bool {
        self.base_shape == other.base_shape
            && self.entries == other.entries
            && (self.is_empty() || self.trailing_semicolon == other.trailing_semicolon)
    }
}

impl fmt::Display for StyleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::with_capacity(self.entries.len() + 1);
        if let Some(base) = &self.base_shape {
            parts.push(base.clone());
        }
        for (key, value) in &self.entries {
            match value {
                Some(v) => parts.push(format!("{key}={v}")),
                None => parts.push(key.clone()),
            }
        }
        f.write_str(&parts.join(";"))?;
        if self.trailing_semicolon && !parts.is_empty() {
            f.write_str(";")?;
        }
        Ok(())
    }
}

impl Serialize for StyleMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StyleMap {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Ok(StyleMap::parse_lossy(&text))
    }
}

/// Reusable named styles (`style_role` -> style), the document's style
/// dictionary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StyleCatalog {
    pub roles: BTreeMap<String, StyleMap>,
}

impl StyleCatalog {
    pub fn new() -> Self {
        StyleCatalog::default()
    }

    pub fn get(&self, role: &str) -> Option<&StyleMap> {
        self.roles.get(role)
    }

    pub fn insert(&mut self, role: impl Into<String>, style: StyleMap) {
        self.roles.insert(role.into(), style);
    }

    pub fn contains(&self, role: &str) -> bool {
        self.roles.contains_key(role)
    }
}
