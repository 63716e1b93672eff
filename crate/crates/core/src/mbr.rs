//! Minimum Bayes risk decoding.
//!
//! Each candidate is scored by its mean utility against a set of
//! pseudo-references; the candidate with the highest expected utility wins,
//! with ties going to the earlier n-best rank.

use std::collections::HashMap;
use std::io::Read;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{bleu_from_stats, chrf_from_stats, BleuProfile, ChrfProfile};
use crate::nbest::{merge_nbest, Hypothesis, NBestList, WeightVector};
use crate::reranker::prune_topk;

/// Dense `rows × cols` matrix of utilities, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UtilityMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl UtilityMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::LengthMismatch {
                what: "matrix values vs rows*cols",
                left: values.len(),
                right: rows * cols,
            });
        }
        Ok(UtilityMatrix { rows, cols, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    /// Reads every matrix in the input: a `rows cols` header followed by
    /// `rows·cols` reals, repeated. Whitespace (including newlines) separates values.
    pub fn read_all<R: Read>(mut reader: R) -> Result<Vec<UtilityMatrix>> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        let mut tokens = text
            .lines()
            .enumerate()
            .flat_map(|(n, l)| l.split_whitespace().map(move |t| (n + 1, t)));
        let mut out = Vec::new();
        while let Some((line, r)) = tokens.next() {
            let (_, c) = tokens
                .next()
                .ok_or_else(|| Error::parse(line, "matrix header needs rows and cols"))?;
            let dim = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(line, format!("bad matrix dimension {t:?}")))
            };
            let (rows, cols) = (dim(r)?, dim(c)?);
            let mut values = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                let (l, t) = tokens
                    .next()
                    .ok_or_else(|| Error::parse(line, format!("matrix truncated, expected {} values", rows * cols)))?;
                let v = t
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(l, format!("bad utility {t:?}")))?;
                values.push(v);
            }
            out.push(UtilityMatrix::new(rows, cols, values)?);
        }
        Ok(out)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(f64::to_string).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Utility `u(pseudo_reference, candidate)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Utility {
    /// Sentence chrF, the candidate as hypothesis and the sample as reference.
    Chrf,
    /// Sentence BLEU with effective order.
    BleuSentence,
    /// A precomputed `candidates × samples` matrix.
    ExternalMatrix(UtilityMatrix),
}

impl Utility {
    /// Built-in utility by name: `chrf` or `bleu-sentence`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "chrf" => Ok(Utility::Chrf),
            "bleu-sentence" | "bleu" => Ok(Utility::BleuSentence),
            other => Err(Error::UnknownMetric(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Utility::Chrf => "chrf",
            Utility::BleuSentence => "bleu-sentence",
            Utility::ExternalMatrix(_) => "external-matrix",
        }
    }
}

/// Samples `y⁽¹⁾…y⁽ᴹ⁾` that stand in for references.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoReferenceSet {
    pub segment_id: usize,
    pub samples: Vec<String>,
}

impl PseudoReferenceSet {
    pub fn new(segment_id: usize, samples: Vec<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid(format!("segment {segment_id} has no pseudo-references")));
        }
        Ok(PseudoReferenceSet { segment_id, samples })
    }

    /// Uses the candidates themselves as pseudo-references.
    pub fn from_candidates(list: &NBestList) -> Result<Self> {
        Self::new(
            list.segment_id,
            list.hypotheses.iter().map(|h| h.text.clone()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn profiled_matrix<'a, P: Sync + Send>(
    candidates: &'a [String],
    samples: &'a [String],
    profile: impl Fn(&str) -> P + Sync + Send,
    utility: impl Fn(&P, &P) -> f64 + Sync + Send,
) -> Vec<f64> {
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut distinct: Vec<&str> = Vec::new();
    let mut ids = |texts: &'a [String]| -> Vec<usize> {
        texts
            .iter()
            .map(|s| {
                *index.entry(s.as_str()).or_insert_with(|| {
                    distinct.push(s);
                    distinct.len() - 1
                })
            })
            .collect()
    };
    let cand_ids = ids(candidates);
    let sample_ids = ids(samples);
    let profiles: Vec<P> = distinct.par_iter().map(|s| profile(s)).collect();
    cand_ids
        .par_iter()
        .flat_map_iter(|&c| {
            let (profiles, utility) = (&profiles, &utility);
            sample_ids.iter().map(move |&s| utility(&profiles[c], &profiles[s]))
        })
        .collect()
}

/// Matrix with entry `(i, j) = u(samples[j], candidates[i])`.
pub fn utility_matrix(candidates: &[String], samples: &[String], u: &Utility) -> Result<UtilityMatrix> {
    if candidates.is_empty() || samples.is_empty() {
        return Err(Error::invalid("utility matrix needs candidates and samples"));
    }
    let values = match u {
        Utility::Chrf => profiled_matrix(candidates, samples, ChrfProfile::new, |hyp, reference| {
            chrf_from_stats(&hyp.stats_against(reference))
        }),
        Utility::BleuSentence => profiled_matrix(candidates, samples, BleuProfile::new, |hyp, reference| {
            bleu_from_stats(&hyp.stats_against(reference), true)
        }),
        Utility::ExternalMatrix(m) => {
            if m.rows != candidates.len() || m.cols != samples.len() {
                return Err(Error::Invalid(format!(
                    "utility matrix is {}x{}, expected {}x{}",
                    m.rows,
                    m.cols,
                    candidates.len(),
                    samples.len()
                )));
            }
            return Ok(m.clone());
        }
    };
    UtilityMatrix::new(candidates.len(), samples.len(), values)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MbrResult {
    pub best: Hypothesis,
    pub best_index: usize,
    /// Mean utility of every candidate, in candidate order.
    pub expected_utilities: Vec<f64>,
}

/// Expected utility per row and the winning row; the earliest row wins ties.
pub fn expected_utilities(matrix: &UtilityMatrix) -> (Vec<f64>, usize) {
    let means: Vec<f64> = (0..matrix.rows)
        .map(|r| matrix.row(r).iter().sum::<f64>() / matrix.cols as f64)
        .collect();
    let mut best = 0;
    for (i, &m) in means.iter().enumerate() {
        if m > means[best] {
            best = i;
        }
    }
    (means, best)
}

pub fn mbr_decode(candidates: &NBestList, prefs: &PseudoReferenceSet, u: &Utility) -> Result<MbrResult> {
    if candidates.is_empty() {
        return Err(Error::invalid(format!(
            "segment {} has no candidates",
            candidates.segment_id
        )));
    }
    if prefs.is_empty() {
        return Err(Error::invalid(format!(
            "segment {} has no pseudo-references",
            prefs.segment_id
        )));
    }
    let matrix = utility_matrix(
        &candidates.hypotheses.iter().map(|h| h.text.clone()).collect::<Vec<_>>(),
        &prefs.samples,
        u,
    )?;
    let (expected_utilities, best_index) = expected_utilities(&matrix);
    Ok(MbrResult {
        best: candidates.hypotheses[best_index].clone(),
        best_index,
        expected_utilities,
    })
}

#[derive(Clone, Debug)]
pub struct TwoStageResult {
    pub mbr: MbrResult,
    /// The pruned candidates that MBR ran over.
    pub candidates: NBestList,
}

/// Merge both lists, keep the `k` best under `weights`, then MBR over the
/// survivors with the survivors as pseudo-references.
pub fn two_stage_decode(
    ensemble: &NBestList,
    document: &NBestList,
    weights: &WeightVector,
    k: usize,
    u: &Utility,
    dedupe: bool,
) -> Result<TwoStageResult> {
    let merged = merge_nbest(ensemble, document, dedupe)?;
    let candidates = prune_topk(&merged, weights, k)?;
    let prefs = PseudoReferenceSet::from_candidates(&candidates)?;
    let mbr = mbr_decode(&candidates, &prefs, u)?;
    Ok(TwoStageResult { mbr, candidates })
}
