//! Parallel corpora and their on-disk forms.

use std::io::{BufRead, Write};
use std::ops::Range;

use crate::error::{Error, Result};

/// One source segment, optionally with its reference translation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub id: usize,
    pub source_text: String,
    pub reference_text: Option<String>,
}

impl Segment {
    pub fn new(id: usize, source_text: impl Into<String>, reference_text: Option<String>) -> Result<Self> {
        let source_text = source_text.into();
        if source_text.trim().is_empty() {
            return Err(Error::invalid(format!("segment {id} has an empty source")));
        }
        Ok(Segment {
            id,
            source_text,
            reference_text,
        })
    }
}

/// Sentence pairs plus optional document boundaries.
///
/// When present, the boundaries are half-open index ranges that partition
/// `0..pairs.len()` in order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub pairs: Vec<(String, String)>,
    documents: Option<Vec<Range<usize>>>,
}

impl ParallelCorpus {
    pub fn new(pairs: Vec<(String, String)>) -> Self {
        ParallelCorpus { pairs, documents: None }
    }

    pub fn with_documents(pairs: Vec<(String, String)>, documents: Vec<Range<usize>>) -> Result<Self> {
        check_partition(&documents, pairs.len())?;
        Ok(ParallelCorpus {
            pairs,
            documents: Some(documents),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn has_documents(&self) -> bool {
        self.documents.is_some()
    }

    /// Document ranges; a corpus without boundaries is a single document.
    pub fn documents(&self) -> Vec<Range<usize>> {
        match &self.documents {
            Some(docs) => docs.clone(),
            None if self.pairs.is_empty() => Vec::new(),
            None => vec![0..self.pairs.len()],
        }
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|(s, _)| s.as_str())
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|(_, t)| t.as_str())
    }

    /// Reads `source<TAB>target` lines.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            let (src, tgt) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(i + 1, "expected `source<TAB>target`"))?;
            if tgt.contains('\t') {
                return Err(Error::parse(i + 1, "more than two tab-separated columns"));
            }
            pairs.push((src.to_string(), tgt.to_string()));
        }
        Ok(Self::new(pairs))
    }

    /// Reads two line-aligned files.
    pub fn read_aligned<A: BufRead, B: BufRead>(source: A, target: B) -> Result<Self> {
        let src = read_lines(source)?;
        let tgt = read_lines(target)?;
        if src.len() != tgt.len() {
            return Err(Error::LengthMismatch {
                what: "parallel corpus sides",
                left: src.len(),
                right: tgt.len(),
            });
        }
        Ok(Self::new(src.into_iter().zip(tgt).collect()))
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for (s, t) in &self.pairs {
            writeln!(out, "{s}\t{t}")?;
        }
        Ok(())
    }
}

fn check_partition(documents: &[Range<usize>], len: usize) -> Result<()> {
    let mut expected_start = 0;
    for (i, doc) in documents.iter().enumerate() {
        if doc.start != expected_start || doc.end <= doc.start {
            return Err(Error::invalid(format!(
                "document range {i} ({}..{}) does not continue the partition at {expected_start}",
                doc.start, doc.end
            )));
        }
        expected_start = doc.end;
    }
    if expected_start != len {
        return Err(Error::invalid(format!(
            "document ranges cover {expected_start} of {len} pairs"
        )));
    }
    Ok(())
}

/// Reads `start end` lines (half-open ranges).
pub fn read_boundaries<R: BufRead>(reader: R) -> Result<Vec<Range<usize>>> {
    let mut ranges = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<usize> {
            parts
                .next()
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::parse(i + 1, "expected `start end`"))
        };
        let start = next()?;
        let end = next()?;
        ranges.push(start..end);
    }
    Ok(ranges)
}

pub fn read_lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    reader
        .lines()
        .map(|l| {
            l.map(|mut l| {
                if l.ends_with('\r') {
                    l.pop();
                }
                l
            })
            .map_err(Error::from)
        })
        .collect()
}
