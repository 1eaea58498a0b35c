//! Fenced-block scanning over free-form model responses.

/// One ```` ```info ... ``` ```` block. An unterminated fence runs to the
/// end of the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fence<'a> {
    pub info: &'a str,
    pub body: &'a str,
    pub closed: bool,
}

pub fn fenced_blocks(text: &str) -> Vec<Fence<'_>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(start) = rest.find("```") {
        let after = &rest[start + 3..];
        let line_end = after.find('\n').unwrap_or(after.len());
        let info = after[..line_end].trim();
        let body_start = (line_end + 1).min(after.len());
        let body_text = &after[body_start..];
        match find_closing(body_text) {
            Some(end) => {
                out.push(Fence { info, body: &body_text[..end], closed: true });
                rest = &body_text[end + 3..];
            }
            None => {
                out.push(Fence { info, body: body_text, closed: false });
                break;
            }
        }
    }
    out
}

// A closing fence starts a line.
fn find_closing(body: &str) -> Option<usize> {
    let mut offset = 0;
    for line in body.split_inclusive('\n') {
        if line.trim_start().starts_with("```") {
            return Some(offset + (line.len() - line.trim_start().len()));
        }
        offset += line.len();
    }
    None
}

/// First balanced `{...}` object in `text`, honouring JSON string escapes.
pub fn scan_json_object(text: &str) -> Option<&str> {
    let bytes = text.as_bytes();
    let mut search = 0;
    while let Some(rel) = text[search..].find('{') {
        let start = search + rel;
        let (mut depth, mut in_str, mut escaped) = (0usize, false, false);
        for (i, &b) in bytes.iter().enumerate().skip(start) {
            if in_str {
                match b {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match b {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        let candidate = &text[start..=i];
                        if serde_json::from_str::<serde_json::Value>(candidate).is_ok() {
                            return Some(candidate);
                        }
                        break;
                    }
                }
                _ => {}
            }
        }
        search = start + 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_info_and_bodies() {
        let text = "intro\n```json\n{\"a\": 1}\n```\nmid\n```xml\n<x/>\n```\n";
        let blocks = fenced_blocks(text);
        assert_eq!(blocks.len(), 2);
        assert_eq!(blocks[0].info, "json");
        assert_eq!(blocks[0].body, "{\"a\": 1}\n");
        assert_eq!(blocks[1].info, "xml");
        assert!(blocks[1].closed);
    }

    #[test]
    fn unterminated_fence_runs_to_end() {
        let blocks = fenced_blocks("```xml\n<mxfile>");
        assert_eq!(blocks, vec![Fence { info: "xml", body: "<mxfile>", closed: false }]);
    }

    #[test]
    fn brace_scan_skips_strings_and_junk() {
        assert_eq!(scan_json_object("see {not json} then {\"k\": \"}\"} end"), Some("{\"k\": \"}\"}"));
        assert_eq!(scan_json_object("nothing here"), None);
    }
}
