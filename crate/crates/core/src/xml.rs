//! Minimal owned XML element tree with tag-balance diagnostics.
//!
//! quick-xml does the tokenizing; tag matching is tracked here so that an
//! element left open can be told apart from genuinely crossed tags.

use std::fmt;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Element>,
    /// Concatenated non-whitespace character data directly inside this element.
    pub text: String,
    /// Byte offset of the start tag.
    pub offset: u64,
}

impl Element {
    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.children.iter().filter(move |c| c.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum XmlErrorKind {
    /// Tokenizer-level failure (bad attribute quoting, stray `<`, empty input...).
    Syntax(String),
    /// An element was still open when its parent closed or the input ended.
    Unclosed { name: String },
    /// Tags cross each other or an end tag has no matching start tag.
    BadNesting { expected: Option<String>, found: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlError {
    pub kind: XmlErrorKind,
    pub offset: u64,
    /// True when the input ended cleanly with elements still open, i.e. the
    /// text looks cut off rather than malformed.
    pub truncated: bool,
}

impl fmt::Display for XmlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            XmlErrorKind::Syntax(msg) => write!(f, "XML syntax error at byte {}: {msg}", self.offset),
            XmlErrorKind::Unclosed { name } => {
                write!(f, "element <{name}> opened at byte {} is never closed", self.offset)
            }
            XmlErrorKind::BadNesting { expected: Some(exp), found } => {
                write!(f, "end tag </{found}> at byte {} crosses open element <{exp}>", self.offset)
            }
            XmlErrorKind::BadNesting { expected: None, found } => {
                write!(f, "end tag </{found}> at byte {} has no matching start tag", self.offset)
            }
        }
    }
}

impl std::error::Error for XmlError {}

struct Open {
    element: Element,
}

/// Parses `text` into a single-rooted element tree.
pub fn parse_tree(text: &str) -> Result<Element, XmlError> {
    let mut reader = Reader::from_str(text);
    {
        let cfg = reader.config_mut();
        cfg.check_end_names = false;
        cfg.allow_unmatched_ends = true;
    }

    let mut stack: Vec<Open> = Vec::new();
    let mut root: Option<Element> = None;
    // Elements force-closed by a later end tag of an ancestor, with the offset
    // of the end tag that did it.
    let mut abandoned: Vec<(String, u64, u64)> = Vec::new();
    let mut first_problem: Option<XmlError> = None;

    loop {
        let pos = reader.buffer_position();
        let event = match reader.read_event() {
            Ok(ev) => ev,
            Err(err) => {
                return Err(XmlError { kind: XmlErrorKind::Syntax(err.to_string()), offset: reader.error_position(), truncated: false });
            }
        };
        match event {
            Event::Start(e) => {
                let element = start_element(&e, pos)?;
                if stack.is_empty() && root.is_some() {
                    return Err(syntax("multiple root elements", pos));
                }
                stack.push(Open { element });
            }
            Event::Empty(e) => {
                let element = start_element(&e, pos)?;
                match stack.last_mut() {
                    Some(parent) => parent.element.children.push(element),
                    None if root.is_none() => root = Some(element),
                    None => return Err(syntax("multiple root elements", pos)),
                }
            }
            Event::End(e) => {
                let name = e.name().0.to_string();
                if let Some(idx) = abandoned.iter().position(|(n, _, _)| *n == name) {
                    // The element we force-closed is closed now: tags crossed.
                    let (exp, _, at) = abandoned.remove(idx);
                    first_problem.get_or_insert(XmlError {
                        kind: XmlErrorKind::BadNesting { expected: Some(exp), found: name },
                        offset: at,
                        truncated: false,
                    });
                    continue;
                }
                match stack.iter().rposition(|o| o.element.name == name) {
                    None => {
                        first_problem.get_or_insert(XmlError {
                            kind: XmlErrorKind::BadNesting { expected: None, found: name },
                            offset: pos,
                            truncated: false,
                        });
                    }
                    Some(idx) => {
                        while stack.len() > idx + 1 {
                            let open = stack.pop().expect("stack above idx");
                            abandoned.push((open.element.name.clone(), open.element.offset, pos));
                            attach(&mut stack, &mut root, open.element);
                        }
                        let open = stack.pop().expect("matched element");
                        attach(&mut stack, &mut root, open.element);
                    }
                }
            }
            Event::Text(t) => {
                let raw = t.to_string();
                let trimmed = raw.trim();
                if !trimmed.is_empty() {
                    match stack.last_mut() {
                        Some(open) => open.element.text.push_str(trimmed),
                        None => return Err(syntax("character data outside the root element", pos)),
                    }
                }
            }
            Event::CData(t) => {
                if let Some(open) = stack.last_mut() {
                    open.element.text.push_str(&t);
                }
            }
            Event::GeneralRef(r) => {
                if let Some(open) = stack.last_mut() {
                    open.element.text.push('&');
                    open.element.text.push_str(&r);
                    open.element.text.push(';');
                }
            }
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }

    if let Some(problem) = first_problem {
        return Err(problem);
    }
    if let Some((name, offset, _)) = abandoned.first() {
        return Err(XmlError { kind: XmlErrorKind::Unclosed { name: name.clone() }, offset: *offset, truncated: false });
    }
    if let Some(open) = stack.last() {
        // Report the innermost open element; it is the one cut off.
        return Err(XmlError {
            kind: XmlErrorKind::Unclosed { name: open.element.name.clone() },
            offset: open.element.offset,
            truncated: true,
        });
    }
    root.ok_or_else(|| syntax("document has no root element", 0))
}

/// True when `text` parses as XML except that it stops with elements still
/// open, which is how a length-limited model response usually looks.
pub fn looks_truncated(text: &str) -> bool {
    matches!(parse_tree(text), Err(XmlError { truncated: true, .. }))
}

fn attach(stack: &mut [Open], root: &mut Option<Element>, element: Element) {
    match stack.last_mut() {
        Some(parent) => parent.element.children.push(element),
        None => {
            if root.is_none() {
                *root = Some(element);
            }
        }
    }
}

fn syntax(msg: &str, offset: u64) -> XmlError {
    XmlError { kind: XmlErrorKind::Syntax(msg.to_string()), offset, truncated: false }
}

fn start_element(e: &BytesStart<'_>, offset: u64) -> Result<Element, XmlError> {
    let name = e.name().0.to_string();
    let mut attrs = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| syntax(&format!("bad attribute in <{name}>: {err}"), offset))?;
        let key = attr.key.0.to_string();
        let value = attr
            .normalized_value(quick_xml::XmlVersion::Implicit1_0)
            .map_err(|err| syntax(&format!("bad attribute value for {key}: {err}"), offset))?
            .into_owned();
        attrs.push((key, value));
    }
    Ok(Element { name, attrs, children: Vec::new(), text: String::new(), offset })
}

/// Escapes an attribute value so that it survives attribute-value
/// normalization on the way back in (newlines and tabs become char refs).
pub fn escape_attr(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for ch in value.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            c => out.push(c),
        }
    }
    out
}
