//! Character n-gram F-score (chrF, β = 2, orders 1..=6, no word n-grams).
//!
//! Whitespace is removed before n-gram extraction. Orders for which either
//! side has no n-grams are left out of the averaged precision and recall.

use std::collections::HashMap;
use std::ops::{AddAssign, SubAssign};

use super::tokenize::is_py_whitespace;

pub const CHAR_ORDER: usize = 6;
pub const BETA: f64 = 2.0;
pub const CHRF_SIGNATURE: &str = "nrefs:1|case:mixed|eff:yes|nc:6|nw:0|space:no|version:2.0.0";

/// Per-order hypothesis, reference and matched n-gram counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ChrfStats {
    pub hyp: [u64; CHAR_ORDER],
    pub reference: [u64; CHAR_ORDER],
    pub matched: [u64; CHAR_ORDER],
}

impl AddAssign<&ChrfStats> for ChrfStats {
    fn add_assign(&mut self, rhs: &ChrfStats) {
        for n in 0..CHAR_ORDER {
            self.hyp[n] += rhs.hyp[n];
            self.reference[n] += rhs.reference[n];
            self.matched[n] += rhs.matched[n];
        }
    }
}

impl SubAssign<&ChrfStats> for ChrfStats {
    fn sub_assign(&mut self, rhs: &ChrfStats) {
        for n in 0..CHAR_ORDER {
            self.hyp[n] -= rhs.hyp[n];
            self.reference[n] -= rhs.reference[n];
            self.matched[n] -= rhs.matched[n];
        }
    }
}

/// Character n-gram counts of one string, reusable across many comparisons.
#[derive(Clone, Debug)]
pub struct ChrfProfile {
    totals: [u64; CHAR_ORDER],
    ngrams: [HashMap<String, u64>; CHAR_ORDER],
}

impl ChrfProfile {
    pub fn new(text: &str) -> Self {
        let chars: Vec<char> = text.chars().filter(|&c| !is_py_whitespace(c)).collect();
        let mut ngrams: [HashMap<String, u64>; CHAR_ORDER] = Default::default();
        let mut totals = [0u64; CHAR_ORDER];
        for n in 0..CHAR_ORDER {
            for gram in chars.windows(n + 1) {
                *ngrams[n].entry(gram.iter().collect()).or_insert(0) += 1;
                totals[n] += 1;
            }
        }
        ChrfProfile { totals, ngrams }
    }

    /// Statistics of `self` as hypothesis against `reference`.
    pub fn stats_against(&self, reference: &ChrfProfile) -> ChrfStats {
        let mut stats = ChrfStats::default();
        for n in 0..CHAR_ORDER {
            let ref_total = reference.totals[n];
            // hypothesis n-grams only count when the reference has any of this order
            stats.hyp[n] = if ref_total > 0 { self.totals[n] } else { 0 };
            stats.reference[n] = ref_total;
            stats.matched[n] = self.ngrams[n]
                .iter()
                .map(|(gram, &count)| count.min(reference.ngrams[n].get(gram).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }
}

pub fn chrf_stats(hyp: &str, reference: &str) -> ChrfStats {
    ChrfProfile::new(hyp).stats_against(&ChrfProfile::new(reference))
}

/// chrF in [0, 100] from (possibly summed) statistics.
pub fn chrf_from_stats(stats: &ChrfStats) -> f64 {
    let factor = BETA * BETA;
    let mut avg_prec = 0.0f64;
    let mut avg_rec = 0.0f64;
    let mut effective_order = 0u32;
    for n in 0..CHAR_ORDER {
        let (n_hyp, n_ref, n_match) = (stats.hyp[n], stats.reference[n], stats.matched[n]);
        if n_hyp > 0 && n_ref > 0 {
            avg_prec += n_match as f64 / n_hyp as f64;
            avg_rec += n_match as f64 / n_ref as f64;
            effective_order += 1;
        }
    }
    if effective_order == 0 {
        return 0.0;
    }
    avg_prec /= effective_order as f64;
    avg_rec /= effective_order as f64;
    if avg_prec + avg_rec == 0.0 {
        return 0.0;
    }
    let score = (1.0 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec);
    100.0 * score
}

pub fn sentence_chrf(hyp: &str, reference: &str) -> f64 {
    chrf_from_stats(&chrf_stats(hyp, reference))
}
