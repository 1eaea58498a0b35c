//! Label text: markup stripping and greedy word wrap.

use regex::Regex;
use std::sync::OnceLock;

/// Average glyph advance as a fraction of the font size.
pub const CHAR_WIDTH_EM: f64 = 0.6;
pub const LINE_HEIGHT_EM: f64 = 1.2;

/// Plain text of an HTML label. `<br>` and block closers become newlines,
/// other tags are dropped and the common entities decoded.
pub fn strip_markup(value: &str) -> String {
    static BREAK: OnceLock<Regex> = OnceLock::new();
    static TAG: OnceLock<Regex> = OnceLock::new();
    let brk = BREAK.get_or_init(|| Regex::new(r"(?i)<br\s*/?>|</(div|p|li)>").unwrap());
    let tag = TAG.get_or_init(|| Regex::new(r"<[^>]*>").unwrap());
    let text = brk.replace_all(value, "\n");
    let text = tag.replace_all(&text, "");
    let text = text
        .replace("&nbsp;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&amp;", "&");
    text.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join("\n")
}

/// Greedy word wrap to `max_width` px at `font_size`. Explicit newlines are
/// kept; a word longer than the line is placed alone.
pub fn wrap_label(text: &str, max_width: f64, font_size: f64) -> Vec<String> {
    let per_line = if max_width > 0.0 { ((max_width / (font_size * CHAR_WIDTH_EM)).floor() as usize).max(1) } else { usize::MAX };
    let mut lines = Vec::new();
    for para in text.split('\n') {
        let mut line = String::new();
        for word in para.split_whitespace() {
            let needed = if line.is_empty() { word.chars().count() } else { line.chars().count() + 1 + word.chars().count() };
            if needed > per_line && !line.is_empty() {
                lines.push(std::mem::take(&mut line));
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(word);
        }
        lines.push(line);
    }
    while lines.last().is_some_and(String::is_empty) && lines.len() > 1 {
        lines.pop();
    }
    lines
}

/// Picks the first ladder size whose wrapped block fits `height`, else the
/// last size.
pub(crate) fn fit_label(text: &str, width: f64, height: f64, ladder: &[f64]) -> (f64, Vec<String>) {
    let mut chosen = None;
    for &size in ladder {
        let lines = wrap_label(text, width, size);
        let fits = height <= 0.0 || lines.len() as f64 * size * LINE_HEIGHT_EM <= height;
        chosen = Some((size, lines));
        if fits {
            break;
        }
    }
    chosen.unwrap_or_else(|| (12.0, wrap_label(text, width, 12.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_html() {
        assert_eq!(strip_markup("<b>Load</b><br>data &amp; more"), "Load\ndata & more");
        assert_eq!(strip_markup("<div>a</div><div>b</div>"), "a\nb");
    }

    #[test]
    fn wraps_greedily() {
        // 60 px at 10 px font: 10 chars per line.
        assert_eq!(wrap_label("alpha beta gamma", 60.0, 10.0), vec!["alpha beta", "gamma"]);
        assert_eq!(wrap_label("supercalifragilistic x", 60.0, 10.0), vec!["supercalifragilistic", "x"]);
        assert_eq!(wrap_label("", 60.0, 10.0), vec![""]);
    }

    #[test]
    fn ladder_steps_down_until_fit() {
        let (size, lines) = fit_label("one two three four", 48.0, 24.0, &[12.0, 8.0]);
        assert_eq!(size, 8.0);
        assert_eq!(lines, vec!["one two", "three four"]);
    }
}
