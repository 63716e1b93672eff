//! The `13a` tokenizer (mteval-v13a), as used for BLEU.

use std::sync::OnceLock;

use regex::Regex;

struct Rules {
    symbols: Regex,
    period_comma_after: Regex,
    period_comma_before: Regex,
    dash_after_digit: Regex,
}

fn rules() -> &'static Rules {
    static RULES: OnceLock<Rules> = OnceLock::new();
    RULES.get_or_init(|| Rules {
        // ASCII ranges { - ~, [ - `, space - &, ( - +, : - @, and /
        symbols: Regex::new(r"([\{-~\[-` -&\(-\+:-@/])").unwrap(),
        period_comma_after: Regex::new(r"([^0-9])([\.,])").unwrap(),
        period_comma_before: Regex::new(r"([\.,])([^0-9])").unwrap(),
        dash_after_digit: Regex::new(r"([0-9])(-)").unwrap(),
    })
}

/// Python's `str.split()` whitespace, which also includes the ASCII
/// information separators U+001C..U+001F.
pub(crate) fn is_py_whitespace(c: char) -> bool {
    c.is_whitespace() || ('\u{1c}'..='\u{1f}').contains(&c)
}

pub(crate) fn py_split(text: &str) -> impl Iterator<Item = &str> {
    text.split(is_py_whitespace).filter(|t| !t.is_empty())
}

/// Tokenizes `text` into a single-space-joined string.
pub fn tokenize_13a_string(text: &str) -> String {
    let mut line = text.replace("<skipped>", "").replace("-\n", "").replace('\n', " ");
    if line.contains('&') {
        line = line
            .replace("&quot;", "\"")
            .replace("&amp;", "&")
            .replace("&lt;", "<")
            .replace("&gt;", ">");
    }
    let r = rules();
    let line = format!(" {line} ");
    let line = r.symbols.replace_all(&line, " $1 ");
    let line = r.period_comma_after.replace_all(&line, "$1 $2 ");
    let line = r.period_comma_before.replace_all(&line, " $1 $2");
    let line = r.dash_after_digit.replace_all(&line, "$1 $2 ");
    py_split(&line).collect::<Vec<_>>().join(" ")
}

pub fn tokenize_13a(text: &str) -> Vec<String> {
    tokenize_13a_string(text)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}
