//! Corpus and sentence BLEU with exponential smoothing.

use std::collections::HashMap;
use std::ops::{AddAssign, SubAssign};

use super::tokenize::{is_py_whitespace, tokenize_13a};

pub const MAX_ORDER: usize = 4;
pub const BLEU_SIGNATURE: &str = "nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp|version:2.0.0";

/// Clipped n-gram matches and totals for n = 1..=4, plus lengths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub correct: [u64; MAX_ORDER],
    pub total: [u64; MAX_ORDER],
    pub hyp_len: u64,
    pub ref_len: u64,
}

impl AddAssign<&BleuStats> for BleuStats {
    fn add_assign(&mut self, rhs: &BleuStats) {
        for n in 0..MAX_ORDER {
            self.correct[n] += rhs.correct[n];
            self.total[n] += rhs.total[n];
        }
        self.hyp_len += rhs.hyp_len;
        self.ref_len += rhs.ref_len;
    }
}

impl SubAssign<&BleuStats> for BleuStats {
    fn sub_assign(&mut self, rhs: &BleuStats) {
        for n in 0..MAX_ORDER {
            self.correct[n] -= rhs.correct[n];
            self.total[n] -= rhs.total[n];
        }
        self.hyp_len -= rhs.hyp_len;
        self.ref_len -= rhs.ref_len;
    }
}

/// Word n-gram counts of one tokenized segment.
#[derive(Clone, Debug)]
pub struct BleuProfile {
    len: u64,
    ngrams: [HashMap<Vec<String>, u64>; MAX_ORDER],
}

impl BleuProfile {
    pub fn new(text: &str) -> Self {
        let tokens = tokenize_13a(text.trim_end_matches(is_py_whitespace));
        let mut ngrams: [HashMap<Vec<String>, u64>; MAX_ORDER] = Default::default();
        for (n, counts) in ngrams.iter_mut().enumerate() {
            for gram in tokens.windows(n + 1) {
                *counts.entry(gram.to_vec()).or_insert(0) += 1;
            }
        }
        BleuProfile {
            len: tokens.len() as u64,
            ngrams,
        }
    }

    /// Statistics of `self` as hypothesis against `reference`.
    pub fn stats_against(&self, reference: &BleuProfile) -> BleuStats {
        let mut stats = BleuStats {
            hyp_len: self.len,
            ref_len: reference.len,
            ..Default::default()
        };
        for n in 0..MAX_ORDER {
            stats.total[n] = self.len.saturating_sub(n as u64);
            stats.correct[n] = self.ngrams[n]
                .iter()
                .map(|(gram, &count)| count.min(reference.ngrams[n].get(gram).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }
}

pub fn bleu_stats(hyp: &str, reference: &str) -> BleuStats {
    BleuProfile::new(hyp).stats_against(&BleuProfile::new(reference))
}

fn smoothed_log(p: f64) -> f64 {
    if p == 0.0 {
        -9_999_999_999.0
    } else {
        p.ln()
    }
}

/// BLEU in [0, 100] from summed statistics.
///
/// `effective_order` limits the geometric mean to the orders for which the
/// hypothesis has at least one n-gram (the sentence-level variant).
pub fn bleu_from_stats(stats: &BleuStats, effective_order: bool) -> f64 {
    let bp = if stats.hyp_len < stats.ref_len {
        if stats.hyp_len > 0 {
            (1.0 - stats.ref_len as f64 / stats.hyp_len as f64).exp()
        } else {
            0.0
        }
    } else {
        1.0
    };

    if stats.correct.iter().all(|&c| c == 0) {
        return 0.0;
    }

    let mut precisions = [0.0f64; MAX_ORDER];
    let mut smooth = 1.0f64;
    let mut eff_order = MAX_ORDER;
    for n in 0..MAX_ORDER {
        if stats.total[n] == 0 {
            break;
        }
        if effective_order {
            eff_order = n + 1;
        }
        if stats.correct[n] == 0 {
            smooth *= 2.0;
            precisions[n] = 100.0 / (smooth * stats.total[n] as f64);
        } else {
            precisions[n] = 100.0 * stats.correct[n] as f64 / stats.total[n] as f64;
        }
    }

    let log_sum = precisions[..eff_order]
        .iter()
        .fold(0.0, |acc, &p| acc + smoothed_log(p));
    bp * (log_sum / eff_order as f64).exp()
}

/// Sentence BLEU as used for MBR utilities: exponential smoothing with effective order.
pub fn sentence_bleu(hyp: &str, reference: &str) -> f64 {
    bleu_from_stats(&bleu_stats(hyp, reference), true)
}
