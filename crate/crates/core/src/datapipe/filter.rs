use std::collections::HashSet;
use std::fmt;

use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};

use super::normalize::{normalize_punct, strip_nonprinting};
use super::whitespace_tokens;

#[derive(Clone, Debug, PartialEq)]
pub struct FilterConfig {
    /// Minimum whitespace tokens on each side.
    pub min_len: usize,
    /// Maximum whitespace tokens on each side.
    pub max_len: usize,
    /// Upper bound on `longer / shorter` token counts.
    pub max_ratio: f64,
    pub dedupe: bool,
    pub normalize_punct: bool,
    pub strip_nonprinting: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_len: 1,
            max_len: 250,
            max_ratio: 3.0,
            dedupe: true,
            normalize_punct: true,
            strip_nonprinting: true,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::invalid(format!(
                "length bounds must satisfy 0 < min ({}) <= max ({})",
                self.min_len, self.max_len
            )));
        }
        if self.max_ratio.is_nan() || self.max_ratio < 1.0 {
            return Err(Error::invalid(format!(
                "max ratio {} must be at least 1",
                self.max_ratio
            )));
        }
        Ok(())
    }

    fn clean(&self, text: &str) -> String {
        if self.normalize_punct {
            normalize_punct(text)
        } else if self.strip_nonprinting {
            strip_nonprinting(text)
        } else {
            text.to_string()
        }
    }
}

/// Removal counts per rule. A pair is counted under the first rule it fails,
/// checked in the order below.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FilterReport {
    pub input: usize,
    pub too_short: usize,
    pub too_long: usize,
    pub ratio: usize,
    pub duplicate: usize,
    pub kept: usize,
}

impl fmt::Display for FilterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "input={}", self.input)?;
        writeln!(f, "too_short={}", self.too_short)?;
        writeln!(f, "too_long={}", self.too_long)?;
        writeln!(f, "ratio={}", self.ratio)?;
        writeln!(f, "duplicate={}", self.duplicate)?;
        writeln!(f, "kept={}", self.kept)
    }
}

/// Cleans every pair, then drops pairs by length, length ratio and exact
/// duplication. Surviving pairs keep their order and are returned in cleaned
/// form. Document boundaries are not carried over.
pub fn filter_corpus(corpus: &ParallelCorpus, cfg: &FilterConfig) -> Result<(ParallelCorpus, FilterReport)> {
    cfg.validate()?;
    let mut report = FilterReport {
        input: corpus.len(),
        ..Default::default()
    };
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut kept = Vec::new();
    for (src, tgt) in &corpus.pairs {
        let (src, tgt) = (cfg.clean(src), cfg.clean(tgt));
        let (ls, lt) = (whitespace_tokens(&src), whitespace_tokens(&tgt));
        if ls.min(lt) < cfg.min_len {
            report.too_short += 1;
        } else if ls.max(lt) > cfg.max_len {
            report.too_long += 1;
        } else if ls.max(lt) as f64 / ls.min(lt) as f64 > cfg.max_ratio {
            report.ratio += 1;
        } else if cfg.dedupe && !seen.insert((src.clone(), tgt.clone())) {
            report.duplicate += 1;
        } else {
            kept.push((src, tgt));
        }
    }
    report.kept = kept.len();
    Ok((ParallelCorpus::new(kept), report))
}
