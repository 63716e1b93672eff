//! N-best lists in the Moses/Marian `|||` format.
//!
//! One hypothesis per line:
//!
//! ```text
//! <segment_id> ||| <text> ||| <name>= <value> <name>= <value> ... ||| <combined_score>
//! ```
//!
//! Lines for one segment are contiguous and segment ids never decrease.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use indexmap::IndexMap;

use crate::error::{Error, Result};

const FIELD_SEP: &str = " ||| ";

/// Where a hypothesis came from. Not part of the wire format; set by the caller at parse time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Origin {
    Ensemble,
    Document,
    #[default]
    Other,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Ensemble => "ensemble",
            Origin::Document => "document",
            Origin::Other => "other",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub segment_id: usize,
    pub text: String,
    pub features: IndexMap<String, f64>,
    pub combined_score: f64,
    pub origin: Origin,
}

impl Hypothesis {
    pub fn new(segment_id: usize, text: impl Into<String>) -> Self {
        Hypothesis {
            segment_id,
            text: text.into(),
            features: IndexMap::new(),
            combined_score: 0.0,
            origin: Origin::Other,
        }
    }

    pub fn with_feature(mut self, name: impl Into<String>, value: f64) -> Self {
        self.features.insert(name.into(), value);
        self
    }

    pub fn with_score(mut self, score: f64) -> Self {
        self.combined_score = score;
        self
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn feature(&self, name: &str) -> Option<f64> {
        self.features.get(name).copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NBestList {
    pub segment_id: usize,
    pub hypotheses: Vec<Hypothesis>,
}

impl NBestList {
    pub fn new(segment_id: usize) -> Self {
        NBestList {
            segment_id,
            hypotheses: Vec::new(),
        }
    }

    /// Builds a list, checking that every hypothesis belongs to `segment_id`.
    pub fn from_hypotheses(segment_id: usize, hypotheses: Vec<Hypothesis>) -> Result<Self> {
        if let Some(h) = hypotheses.iter().find(|h| h.segment_id != segment_id) {
            return Err(Error::SegmentMismatch {
                left: segment_id,
                right: h.segment_id,
            });
        }
        Ok(NBestList { segment_id, hypotheses })
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.hypotheses.iter().map(|h| h.text.as_str()).collect()
    }

    pub fn set_origin(&mut self, origin: Origin) {
        for h in &mut self.hypotheses {
            h.origin = origin;
        }
    }
}

/// Feature weights of a linear reranker. Insertion order is kept so that
/// dot products and weight files are deterministic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightVector(IndexMap<String, f64>);

impl WeightVector {
    /// Validates that every weight is finite and at least one is non-zero.
    pub fn new(weights: IndexMap<String, f64>) -> Result<Self> {
        if let Some((name, _)) = weights.iter().find(|(_, w)| !w.is_finite()) {
            return Err(Error::invalid(format!("weight `{name}` is not finite")));
        }
        if !weights.values().any(|&w| w != 0.0) {
            return Err(Error::invalid("weight vector needs at least one non-zero weight"));
        }
        Ok(WeightVector(weights))
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, f64)>) -> Result<Self> {
        Self::new(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    /// Overwrites one weight. Used by tuners, which may pass through all-zero states.
    pub fn set(&mut self, name: &str, value: f64) {
        if let Some(w) = self.0.get_mut(name) {
            *w = value;
        } else {
            self.0.insert(name.to_string(), value);
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ w_f · feature_f` over the weighted features. Features without a
    /// weight are ignored; a weighted feature missing from `features` is
    /// reported by name.
    pub fn dot(&self, features: &IndexMap<String, f64>) -> std::result::Result<f64, String> {
        let mut total = 0.0;
        for (name, &w) in &self.0 {
            match features.get(name) {
                Some(&v) => total += w * v,
                None => return Err(name.clone()),
            }
        }
        Ok(total)
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> WeightVector {
        WeightVector(self.0.iter().map(|(k, &v)| (k.clone(), v * factor)).collect())
    }

    /// Reads `name<TAB>value` lines. Blank lines are skipped.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut weights = IndexMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (name, value) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno, "expected `name<TAB>value`"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(lineno, format!("non-numeric weight `{value}`")))?;
            if weights.insert(name.to_string(), value).is_some() {
                return Err(Error::parse(lineno, format!("duplicate weight `{name}`")));
            }
        }
        Self::new(weights)
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (name, value) in &self.0 {
            writeln!(out, "{name}\t{value}")?;
        }
        Ok(())
    }
}

impl FromStr for WeightVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::read(s.as_bytes())
    }
}

fn parse_number(field: &str, lineno: usize, what: &str) -> Result<f64> {
    let value: f64 = field
        .parse()
        .map_err(|_| Error::parse(lineno, format!("non-numeric {what} `{field}`")))?;
    if !value.is_finite() {
        return Err(Error::parse(lineno, format!("{what} `{field}` is not finite")));
    }
    Ok(value)
}

fn parse_features(field: &str, lineno: usize) -> Result<IndexMap<String, f64>> {
    let mut features = IndexMap::new();
    let mut tokens = field.split_whitespace();
    while let Some(name) = tokens.next() {
        let name = name
            .strip_suffix('=')
            .filter(|n| !n.is_empty())
            .ok_or_else(|| Error::parse(lineno, format!("expected `name=` but found `{name}`")))?;
        let value = tokens
            .next()
            .ok_or_else(|| Error::parse(lineno, format!("feature `{name}` has no value")))?;
        let value = parse_number(value, lineno, "feature value")?;
        if features.insert(name.to_string(), value).is_some() {
            return Err(Error::parse(lineno, format!("duplicate feature `{name}`")));
        }
    }
    Ok(features)
}

fn parse_line(line: &str, lineno: usize, origin: Origin) -> Result<Hypothesis> {
    let fields: Vec<&str> = line.split(FIELD_SEP).collect();
    if fields.len() != 4 {
        return Err(Error::parse(
            lineno,
            format!("expected 4 `|||`-separated fields, found {}", fields.len()),
        ));
    }
    let segment_id: usize = fields[0]
        .trim()
        .parse()
        .map_err(|_| Error::parse(lineno, format!("invalid segment id `{}`", fields[0])))?;
    Ok(Hypothesis {
        segment_id,
        text: fields[1].to_string(),
        features: parse_features(fields[2], lineno)?,
        combined_score: parse_number(fields[3].trim(), lineno, "score")?,
        origin,
    })
}

/// Parses an n-best stream, tagging every hypothesis with [`Origin::Other`].
pub fn parse_nbest<R: BufRead>(reader: R) -> Result<Vec<NBestList>> {
    parse_nbest_with_origin(reader, Origin::Other)
}

pub fn parse_nbest_with_origin<R: BufRead>(reader: R, origin: Origin) -> Result<Vec<NBestList>> {
    let mut lists: Vec<NBestList> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let hyp = parse_line(line, lineno, origin)?;
        match lists.last_mut() {
            Some(last) if last.segment_id == hyp.segment_id => last.hypotheses.push(hyp),
            Some(last) if last.segment_id > hyp.segment_id => {
                return Err(Error::parse(
                    lineno,
                    format!(
                        "segment id {} after {}; ids must be non-decreasing",
                        hyp.segment_id, last.segment_id
                    ),
                ));
            }
            _ => lists.push(NBestList {
                segment_id: hyp.segment_id,
                hypotheses: vec![hyp],
            }),
        }
    }
    Ok(lists)
}

pub fn parse_nbest_str(text: &str) -> Result<Vec<NBestList>> {
    parse_nbest(text.as_bytes())
}

pub fn format_hypothesis(h: &Hypothesis) -> String {
    let features = h
        .features
        .iter()
        .map(|(name, value)| format!("{name}= {value}"))
        .collect::<Vec<_>>()
        .join(" ");
    format!(
        "{}{FIELD_SEP}{}{FIELD_SEP}{}{FIELD_SEP}{}",
        h.segment_id, h.text, features, h.combined_score
    )
}

pub fn write_nbest<W: Write>(lists: &[NBestList], mut out: W) -> Result<()> {
    for list in lists {
        for h in &list.hypotheses {
            writeln!(out, "{}", format_hypothesis(h))?;
        }
    }
    Ok(())
}

pub fn write_nbest_string(lists: &[NBestList]) -> String {
    let mut buf = Vec::new();
    write_nbest(lists, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("n-best text is UTF-8")
}

/// Union of two lists for the same segment, `a` first.
///
/// With `dedupe`, hypotheses with identical text collapse into one slot (the
/// position of the first occurrence). The survivor is the one with the higher
/// combined score; on equal scores an ensemble hypothesis beats any other
/// origin, then the earlier one wins.
pub fn merge_nbest(a: &NBestList, b: &NBestList, dedupe: bool) -> Result<NBestList> {
    if a.segment_id != b.segment_id {
        return Err(Error::SegmentMismatch {
            left: a.segment_id,
            right: b.segment_id,
        });
    }
    let all = a.hypotheses.iter().chain(&b.hypotheses);
    if !dedupe {
        return Ok(NBestList {
            segment_id: a.segment_id,
            hypotheses: all.cloned().collect(),
        });
    }

    let mut merged: Vec<Hypothesis> = Vec::new();
    let mut slots: HashMap<&str, usize> = HashMap::new();
    for h in all {
        match slots.get(h.text.as_str()) {
            Some(&slot) => {
                let current = &merged[slot];
                let better = h.combined_score > current.combined_score
                    || (h.combined_score == current.combined_score
                        && h.origin == Origin::Ensemble
                        && current.origin != Origin::Ensemble);
                if better {
                    merged[slot] = h.clone();
                }
            }
            None => {
                slots.insert(&h.text, merged.len());
                merged.push(h.clone());
            }
        }
    }
    Ok(NBestList {
        segment_id: a.segment_id,
        hypotheses: merged,
    })
}

/// Pairs up two n-best files by segment id. A segment missing from one side
/// gets an empty list there.
pub fn align_lists(a: Vec<NBestList>, b: Vec<NBestList>) -> Vec<(NBestList, NBestList)> {
    let mut by_id: std::collections::BTreeMap<usize, (Option<NBestList>, Option<NBestList>)> = Default::default();
    for list in a {
        let id = list.segment_id;
        by_id.entry(id).or_default().0 = Some(list);
    }
    for list in b {
        let id = list.segment_id;
        by_id.entry(id).or_default().1 = Some(list);
    }
    by_id
        .into_iter()
        .map(|(id, (a, b))| {
            (
                a.unwrap_or_else(|| NBestList::new(id)),
                b.unwrap_or_else(|| NBestList::new(id)),
            )
        })
        .collect()
}
