//! Rule-based post-editing of final translations.
//!
//! Seven rules run in a fixed order, each looking at the source sentence and
//! the current hypothesis:
//!
//! | id | name | effect |
//! |----|------|--------|
//! | r1 | `emoji` | copy emoji missing from the hypothesis |
//! | r2 | `quotes` | pair straight double quotes into `„…“` (cs) or `«…»` (uk) |
//! | r3 | `capitalization` | all-caps source → all-caps output; otherwise match an initial capital |
//! | r4 | `punctuation` | make the final `.`, `!` or `?` match the source |
//! | r5 | `ellipsis` | `...` → `…` |
//! | r6 | `bullets` | restore a leading `-`, `•`, `*`, `N.` or `N)` |
//! | r7 | `repeats` | collapse runs of identical tokens |
//!
//! Emoji are matched with the Unicode `Extended_Pictographic` property, plus
//! the modifiers, variation selectors and joiners that extend them, and flag
//! pairs. Every rule is idempotent and so is the whole pipeline.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use regex::Regex;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Emoji,
    Quotes,
    Capitalization,
    Punctuation,
    Ellipsis,
    Bullets,
    Repeats,
}

impl Rule {
    pub const ALL: [Rule; 7] = [
        Rule::Emoji,
        Rule::Quotes,
        Rule::Capitalization,
        Rule::Punctuation,
        Rule::Ellipsis,
        Rule::Bullets,
        Rule::Repeats,
    ];

    pub fn id(self) -> &'static str {
        ["r1", "r2", "r3", "r4", "r5", "r6", "r7"][self as usize]
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::Emoji => "emoji",
            Rule::Quotes => "quotes",
            Rule::Capitalization => "capitalization",
            Rule::Punctuation => "punctuation",
            Rule::Ellipsis => "ellipsis",
            Rule::Bullets => "bullets",
            Rule::Repeats => "repeats",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.id() == s || r.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown post-processing rule {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Language {
    Cs,
    Uk,
    #[default]
    Other,
}

impl FromStr for Language {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cs" => Ok(Language::Cs),
            "uk" => Ok(Language::Uk),
            "other" => Ok(Language::Other),
            _ => Err(Error::invalid(format!("unknown target language {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PostprocessConfig {
    pub language: Language,
    pub enabled: Vec<Rule>,
}

impl PostprocessConfig {
    /// All rules for the given language.
    pub fn new(language: Language) -> Self {
        PostprocessConfig {
            language,
            enabled: Rule::ALL.to_vec(),
        }
    }

    /// Parses a comma-separated rule list such as `r1,r5,repeats`.
    pub fn with_rules(language: Language, rules: &str) -> Result<Self> {
        let enabled = rules
            .split(',')
            .map(str::trim)
            .filter(|r| !r.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Rule>>>()?;
        Ok(PostprocessConfig { language, enabled })
    }

    pub fn is_enabled(&self, rule: Rule) -> bool {
        self.enabled.contains(&rule)
    }
}

/// Token alignment as `(source_token, target_token)` pairs.
pub type Alignment = [(usize, usize)];

/// Parses `i-j` pairs separated by spaces.
pub fn parse_alignment(line: &str) -> Result<Vec<(usize, usize)>> {
    line.split_whitespace()
        .map(|p| {
            p.split_once('-')
                .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
                .ok_or_else(|| Error::invalid(format!("bad alignment pair {p:?}")))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub rule: Rule,
    pub before: String,
    pub after: String,
}

impl TraceEntry {
    pub fn changed(&self) -> bool {
        self.before != self.after
    }
}

pub fn apply_rules(source: &str, hypothesis: &str, cfg: &PostprocessConfig, alignment: Option<&Alignment>) -> String {
    let mut text = hypothesis.to_string();
    for rule in Rule::ALL {
        if cfg.is_enabled(rule) {
            text = apply_rule(rule, source, &text, cfg.language, alignment);
        }
    }
    text
}

/// One entry per rule in pipeline order; disabled rules leave the text unchanged.
pub fn rule_trace(
    source: &str,
    hypothesis: &str,
    cfg: &PostprocessConfig,
    alignment: Option<&Alignment>,
) -> Vec<TraceEntry> {
    let mut text = hypothesis.to_string();
    Rule::ALL
        .into_iter()
        .map(|rule| {
            let before = text.clone();
            if cfg.is_enabled(rule) {
                text = apply_rule(rule, source, &text, cfg.language, alignment);
            }
            TraceEntry {
                rule,
                before,
                after: text.clone(),
            }
        })
        .collect()
}

pub fn apply_rule(rule: Rule, source: &str, hyp: &str, language: Language, alignment: Option<&Alignment>) -> String {
    match rule {
        Rule::Emoji => transfer_emoji(source, hyp, alignment),
        Rule::Quotes => restore_quotes(hyp, language),
        Rule::Capitalization => restore_capitalization(source, hyp),
        Rule::Punctuation => restore_final_mark(source, hyp),
        Rule::Ellipsis => hyp.replace("...", "…"),
        Rule::Bullets => restore_bullet(source, hyp),
        Rule::Repeats => collapse_repeats(hyp),
    }
}

fn emoji_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let unit = r"\p{Extended_Pictographic}[\x{FE0E}\x{FE0F}\x{1F3FB}-\x{1F3FF}\x{20E3}]*";
        Regex::new(&format!(r"\p{{Regional_Indicator}}{{2}}|{unit}(?:\x{{200D}}{unit})*")).expect("valid emoji regex")
    })
}

/// Emoji occurrences with their char offsets.
pub fn find_emoji(text: &str) -> Vec<(usize, &str)> {
    emoji_regex()
        .find_iter(text)
        .map(|m| (text[..m.start()].chars().count(), m.as_str()))
        .collect()
}

fn contains_emoji(token: &str) -> bool {
    emoji_regex().is_match(token)
}

fn is_emoji_only(token: &str) -> bool {
    emoji_regex().find_iter(token).map(|m| m.len()).sum::<usize>() == token.len()
}

/// Whitespace tokens with their starting char offsets.
fn tokens_with_offsets(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (char offset, byte offset)
    for (ci, (bi, c)) in text.char_indices().enumerate() {
        if c.is_whitespace() {
            if let Some((cs, bs)) = start.take() {
                out.push((cs, &text[bs..bi]));
            }
        } else if start.is_none() {
            start = Some((ci, bi));
        }
    }
    if let Some((cs, bs)) = start {
        out.push((cs, &text[bs..]));
    }
    out
}

/// Slot index in `0..=tokens.len()`: insert before token `k`, or at the end.
fn proportional_slot(source_offset: usize, source_len: usize, hyp: &str, hyp_tokens: &[(usize, &str)]) -> usize {
    let hyp_len = hyp.chars().count();
    let target = source_offset as f64 / source_len.max(1) as f64 * hyp_len as f64;
    let mut best = hyp_tokens.len();
    let mut best_dist = (hyp_len as f64 - target).abs();
    for (k, &(start, _)) in hyp_tokens.iter().enumerate() {
        let d = (start as f64 - target).abs();
        if d < best_dist || (d == best_dist && k < best) {
            best = k;
            best_dist = d;
        }
    }
    best
}

/// Slot from the alignment: after the target of the source token holding the
/// emoji, else after the target of the nearest aligned source token before
/// it, else before the target of the nearest aligned token after it.
fn aligned_slot(source_token: usize, alignment: &Alignment, hyp_tokens: usize) -> Option<usize> {
    let targets = |s: usize| {
        alignment
            .iter()
            .filter(move |&&(a, b)| a == s && b < hyp_tokens)
            .map(|&(_, b)| b)
    };
    if let Some(t) = targets(source_token).max() {
        return Some(t + 1);
    }
    let before = (0..source_token).rev().find_map(|s| targets(s).max()).map(|t| t + 1);
    before.or_else(|| {
        let max_source = alignment.iter().map(|&(a, _)| a).max()?;
        (source_token + 1..=max_source).find_map(|s| targets(s).min())
    })
}

fn transfer_emoji(source: &str, hyp: &str, alignment: Option<&Alignment>) -> String {
    let source_emoji = find_emoji(source);
    if source_emoji.is_empty() {
        return hyp.to_string();
    }
    let mut available: HashMap<&str, usize> = HashMap::new();
    for (_, e) in find_emoji(hyp) {
        *available.entry(e).or_default() += 1;
    }
    let source_len = source.chars().count();
    let source_tokens = tokens_with_offsets(source);
    let hyp_tokens = tokens_with_offsets(hyp);
    let mut inserts: Vec<(usize, &str)> = Vec::new();
    for (offset, e) in source_emoji {
        match available.get_mut(e) {
            Some(n) if *n > 0 => *n -= 1,
            _ => {
                let source_token = source_tokens
                    .iter()
                    .rposition(|&(start, _)| start <= offset)
                    .unwrap_or(0);
                let slot = alignment
                    .and_then(|a| aligned_slot(source_token, a, hyp_tokens.len()))
                    .unwrap_or_else(|| proportional_slot(offset, source_len, hyp, &hyp_tokens));
                inserts.push((slot, e));
            }
        }
    }
    if inserts.is_empty() {
        return hyp.to_string();
    }
    let mut parts: Vec<&str> = Vec::new();
    for k in 0..=hyp_tokens.len() {
        parts.extend(inserts.iter().filter(|(s, _)| *s == k).map(|(_, e)| *e));
        if let Some(&(_, t)) = hyp_tokens.get(k) {
            parts.push(t);
        }
    }
    parts.join(" ")
}

fn restore_quotes(hyp: &str, language: Language) -> String {
    let (open, close) = match language {
        Language::Cs => ('„', '“'),
        Language::Uk => ('«', '»'),
        Language::Other => return hyp.to_string(),
    };
    let total = hyp.matches('"').count();
    let paired = total - total % 2;
    let mut seen = 0;
    hyp.chars()
        .map(|c| {
            if c != '"' {
                return c;
            }
            seen += 1;
            match seen {
                n if n > paired => c,
                n if n % 2 == 1 => open,
                _ => close,
            }
        })
        .collect()
}

fn restore_capitalization(source: &str, hyp: &str) -> String {
    let mut letters = source.chars().filter(|c| c.is_alphabetic()).peekable();
    let Some(&first) = letters.peek() else {
        return hyp.to_string();
    };
    if letters.all(char::is_uppercase) {
        return hyp.to_uppercase();
    }
    if first.is_uppercase() {
        if let Some((i, c)) = hyp.char_indices().find(|(_, c)| c.is_alphabetic()) {
            if c.is_lowercase() {
                let mut out = String::with_capacity(hyp.len() + 2);
                out.push_str(&hyp[..i]);
                out.extend(c.to_uppercase());
                out.push_str(&hyp[i + c.len_utf8()..]);
                return out;
            }
        }
    }
    hyp.to_string()
}

fn restore_final_mark(source: &str, hyp: &str) -> String {
    let Some(mark) = source
        .trim_end()
        .chars()
        .last()
        .filter(|c| matches!(c, '.' | '!' | '?'))
    else {
        return hyp.to_string();
    };
    let body = hyp.trim_end();
    let Some(last) = body.chars().last() else {
        return hyp.to_string();
    };
    if last == mark || (mark == '.' && last == '…') {
        return hyp.to_string();
    }
    if matches!(last, '.' | '!' | '?') {
        format!("{}{mark}", &body[..body.len() - 1])
    } else {
        format!("{body}{mark}")
    }
}

fn bullet_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*([-•*]|[0-9]+[.)])\s").expect("valid bullet regex"))
}

fn restore_bullet(source: &str, hyp: &str) -> String {
    let Some(prefix) = bullet_regex()
        .captures(source)
        .map(|c| c.get(1).expect("group").as_str())
    else {
        return hyp.to_string();
    };
    let trimmed = hyp.trim_start();
    if trimmed.is_empty() || trimmed.starts_with(prefix) {
        return hyp.to_string();
    }
    format!("{prefix} {trimmed}")
}

fn collapse_repeats(hyp: &str) -> String {
    let tokens: Vec<&str> = hyp.split_whitespace().collect();
    let repeated = tokens.windows(2).any(|w| w[0] == w[1] && !contains_emoji(w[0]));
    if !repeated {
        return hyp.to_string();
    }
    let mut out: Vec<&str> = Vec::with_capacity(tokens.len());
    for t in tokens {
        if out.last() == Some(&t) && !contains_emoji(t) {
            continue;
        }
        out.push(t);
    }
    out.join(" ")
}

/// True when every token of `text` that holds an emoji consists only of emoji.
pub fn emoji_tokens_are_separate(text: &str) -> bool {
    text.split_whitespace().filter(|t| contains_emoji(t)).all(is_emoji_only)
}
