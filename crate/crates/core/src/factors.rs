//! Named-entity source factors.
//!
//! Tokens carry one of seven labels: `p0` for ordinary tokens and `p1`..`p6`
//! for PER, LOC, ORG, MISC, PRO and EVT. Factored text is written as
//! space-separated `surface|pN` items, one sentence per line.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default word-initial subword marker.
pub const WORD_MARKER: &str = "▁";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityCategory {
    Per,
    Loc,
    Org,
    Misc,
    Pro,
    Evt,
}

impl EntityCategory {
    pub const ALL: [EntityCategory; 6] = [
        EntityCategory::Per,
        EntityCategory::Loc,
        EntityCategory::Org,
        EntityCategory::Misc,
        EntityCategory::Pro,
        EntityCategory::Evt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityCategory::Per => "PER",
            EntityCategory::Loc => "LOC",
            EntityCategory::Org => "ORG",
            EntityCategory::Misc => "MISC",
            EntityCategory::Pro => "PRO",
            EntityCategory::Evt => "EVT",
        }
    }

    pub fn label(self) -> FactorLabel {
        match self {
            EntityCategory::Per => FactorLabel::P1,
            EntityCategory::Loc => FactorLabel::P2,
            EntityCategory::Org => FactorLabel::P3,
            EntityCategory::Misc => FactorLabel::P4,
            EntityCategory::Pro => FactorLabel::P5,
            EntityCategory::Evt => FactorLabel::P6,
        }
    }
}

impl fmt::Display for EntityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EntityCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EntityCategory::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown entity category {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactorLabel {
    #[default]
    P0,
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
}

impl FactorLabel {
    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn category(self) -> Option<EntityCategory> {
        match self {
            FactorLabel::P0 => None,
            FactorLabel::P1 => Some(EntityCategory::Per),
            FactorLabel::P2 => Some(EntityCategory::Loc),
            FactorLabel::P3 => Some(EntityCategory::Org),
            FactorLabel::P4 => Some(EntityCategory::Misc),
            FactorLabel::P5 => Some(EntityCategory::Pro),
            FactorLabel::P6 => Some(EntityCategory::Evt),
        }
    }
}

impl fmt::Display for FactorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.index())
    }
}

impl FromStr for FactorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "p0" => FactorLabel::P0,
            "p1" => FactorLabel::P1,
            "p2" => FactorLabel::P2,
            "p3" => FactorLabel::P3,
            "p4" => FactorLabel::P4,
            "p5" => FactorLabel::P5,
            "p6" => FactorLabel::P6,
            _ => return Err(Error::invalid(format!("unknown factor {s:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredToken {
    pub surface: String,
    pub factor: FactorLabel,
}

impl FactoredToken {
    pub fn new(surface: impl Into<String>, factor: FactorLabel) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() || surface.contains('|') || surface.chars().any(char::is_whitespace) {
            return Err(Error::invalid(format!("invalid factored surface {surface:?}")));
        }
        Ok(FactoredToken { surface, factor })
    }
}

impl fmt::Display for FactoredToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}", self.surface, self.factor)
    }
}

/// Tokens `start..end` of a sentence belong to one entity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub category: EntityCategory,
}

impl EntitySpan {
    pub fn new(start: usize, end: usize, category: EntityCategory) -> Self {
        EntitySpan { start, end, category }
    }
}

/// Labels every token; tokens inside a span get the span's label, all others `p0`.
pub fn attach_factors<S: AsRef<str>>(tokens: &[S], spans: &[EntitySpan]) -> Result<Vec<FactoredToken>> {
    let mut labels = vec![FactorLabel::P0; tokens.len()];
    let mut covered = vec![false; tokens.len()];
    for s in spans {
        if s.start >= s.end || s.end > tokens.len() {
            return Err(Error::Span(format!(
                "span {}..{} out of range for {} tokens",
                s.start,
                s.end,
                tokens.len()
            )));
        }
        for i in s.start..s.end {
            if covered[i] {
                return Err(Error::Span(format!(
                    "span {}..{} overlaps another span at token {i}",
                    s.start, s.end
                )));
            }
            covered[i] = true;
            labels[i] = s.category.label();
        }
    }
    tokens
        .iter()
        .zip(labels)
        .map(|(t, l)| FactoredToken::new(t.as_ref(), l))
        .collect()
}

/// Transfers token factors to a subword segmentation of the same sentence.
///
/// Subwords are consumed left to right and concatenated, with one leading
/// `marker` removed from each, until they spell the current token exactly.
/// A marked subword may not continue a partially built token.
pub fn propagate_to_subwords<S: AsRef<str>>(
    factored: &[FactoredToken],
    subwords: &[S],
    marker: &str,
) -> Result<Vec<FactoredToken>> {
    let mut out = Vec::with_capacity(subwords.len());
    let mut token = 0;
    let mut built = String::new();
    for (position, piece) in subwords.iter().enumerate() {
        let piece = piece.as_ref();
        let Some(target) = factored.get(token) else {
            return Err(Error::Alignment {
                position,
                message: format!("subword {piece:?} is past the last token"),
            });
        };
        let body = match piece.strip_prefix(marker) {
            Some(rest) if !marker.is_empty() => {
                if !built.is_empty() {
                    return Err(Error::Alignment {
                        position,
                        message: format!("word-initial subword {piece:?} inside token {:?}", target.surface),
                    });
                }
                rest
            }
            _ => piece,
        };
        built.push_str(body);
        if !target.surface.starts_with(built.as_str()) {
            return Err(Error::Alignment {
                position,
                message: format!("subwords {built:?} do not compose token {:?}", target.surface),
            });
        }
        out.push(FactoredToken::new(piece, target.factor)?);
        if built == target.surface {
            built.clear();
            token += 1;
        }
    }
    if token != factored.len() {
        return Err(Error::Alignment {
            position: subwords.len(),
            message: format!("subwords end inside or before token {token} of {}", factored.len()),
        });
    }
    Ok(out)
}

/// Parses one factored sentence.
pub fn parse_factored(line: &str) -> Result<Vec<FactoredToken>> {
    parse_factored_line(line, 1)
}

fn parse_factored_line(line: &str, number: usize) -> Result<Vec<FactoredToken>> {
    line.split_whitespace()
        .map(|item| {
            let (surface, factor) = item
                .rsplit_once('|')
                .ok_or_else(|| Error::parse(number, format!("{item:?} has no |pN factor")))?;
            let factor = factor
                .parse()
                .map_err(|_| Error::parse(number, format!("{item:?} has an invalid factor")))?;
            FactoredToken::new(surface, factor).map_err(|e| Error::parse(number, e.to_string()))
        })
        .collect()
}

pub fn write_factored(tokens: &[FactoredToken]) -> String {
    tokens.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Reads one factored sentence per line.
pub fn read_factored<R: BufRead>(reader: R) -> Result<Vec<Vec<FactoredToken>>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| parse_factored_line(&line?, i + 1))
        .collect()
}

/// Counts entity occurrences as maximal runs of one non-`p0` label.
/// Adjacent entities of the same category therefore count once.
pub fn count_categories<'a, I>(sentences: I) -> BTreeMap<EntityCategory, usize>
where
    I: IntoIterator<Item = &'a [FactoredToken]>,
{
    let mut counts: BTreeMap<EntityCategory, usize> = EntityCategory::ALL.iter().map(|&c| (c, 0)).collect();
    for sentence in sentences {
        let mut previous = FactorLabel::P0;
        for t in sentence {
            if t.factor != previous {
                if let Some(c) = t.factor.category() {
                    *counts.get_mut(&c).expect("all categories present") += 1;
                }
            }
            previous = t.factor;
        }
    }
    counts
}

/// Reads standoff annotations, `sent_id start end CATEGORY` per line, grouped by sentence.
pub fn read_standoff<R: BufRead>(reader: R) -> Result<BTreeMap<usize, Vec<EntitySpan>>> {
    let mut out: BTreeMap<usize, Vec<EntitySpan>> = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if fields.len() != 4 {
            return Err(Error::parse(i + 1, "expected `sent_id start end CATEGORY`"));
        }
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(i + 1, format!("bad integer {s:?}")))
        };
        let category = fields[3]
            .parse()
            .map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
        out.entry(num(fields[0])?)
            .or_default()
            .push(EntitySpan::new(num(fields[1])?, num(fields[2])?, category));
    }
    Ok(out)
}

/// Exact-match phrase tagger.
#[derive(Clone, Debug, Default)]
pub struct Gazetteer {
    /// First token to phrases starting with it, longest first.
    phrases: HashMap<String, Vec<(Vec<String>, EntityCategory)>>,
}

impl Gazetteer {
    pub fn new<P: AsRef<str>>(entries: impl IntoIterator<Item = (P, EntityCategory)>) -> Self {
        let mut g = Gazetteer::default();
        for (phrase, category) in entries {
            let tokens: Vec<String> = phrase.as_ref().split_whitespace().map(str::to_string).collect();
            if let Some(first) = tokens.first().cloned() {
                g.phrases.entry(first).or_default().push((tokens, category));
            }
        }
        for list in g.phrases.values_mut() {
            list.sort_by_key(|p| std::cmp::Reverse(p.0.len()));
            list.dedup_by(|a, b| a.0 == b.0);
        }
        g
    }

    /// Reads `phrase<TAB>CATEGORY` lines.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (phrase, category) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected phrase<TAB>CATEGORY"))?;
            let category = category
                .trim()
                .parse()
                .map_err(|e: Error| Error::parse(i + 1, e.to_string()))?;
            entries.push((phrase.to_string(), category));
        }
        Ok(Gazetteer::new(entries))
    }

    /// Non-overlapping spans, scanning left to right and preferring the longest phrase.
    pub fn tag<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<EntitySpan> {
        let mut spans = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let hit = self.phrases.get(tokens[i].as_ref()).and_then(|cands| {
                cands.iter().find(|(p, _)| {
                    i + p.len() <= tokens.len() && p.iter().zip(&tokens[i..]).all(|(a, b)| a == b.as_ref())
                })
            });
            match hit {
                Some((p, c)) => {
                    spans.push(EntitySpan::new(i, i + p.len(), *c));
                    i += p.len();
                }
                None => i += 1,
            }
        }
        spans
    }
}
