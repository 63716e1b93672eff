//! Reference-based evaluation metrics.
//!
//! BLEU and chrF reproduce sacreBLEU 2.0.0 with the signatures
//! [`BLEU_SIGNATURE`] and [`CHRF_SIGNATURE`]. Scores are computed from
//! additive sufficient statistics ([`MetricStats`]), so corpus scores, bootstrap
//! resamples and MERT line sweeps all reuse per-sentence work.
//!
//! The `external` metric averages per-sentence scores produced elsewhere
//! (for example COMET); its statistics are a running sum and count.

mod bleu;
mod bootstrap;
mod chrf;
mod tokenize;

use std::fmt;
use std::ops::{AddAssign, SubAssign};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub use bleu::{bleu_from_stats, bleu_stats, sentence_bleu, BleuProfile, BleuStats, BLEU_SIGNATURE};
pub use bootstrap::{paired_bootstrap, paired_bootstrap_stats, BootstrapResult};
pub use chrf::{chrf_from_stats, chrf_stats, sentence_chrf, ChrfProfile, ChrfStats, CHRF_SIGNATURE};
pub use tokenize::{tokenize_13a, tokenize_13a_string};

pub const EXTERNAL_SIGNATURE: &str = "nrefs:1|external:mean";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Bleu,
    Chrf,
    External,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Bleu => "bleu",
            MetricKind::Chrf => "chrf",
            MetricKind::External => "external",
        }
    }

    /// Display name used next to scores, following sacreBLEU.
    pub fn display_name(self) -> &'static str {
        match self {
            MetricKind::Bleu => "BLEU",
            MetricKind::Chrf => "chrF2",
            MetricKind::External => "external",
        }
    }

    pub fn signature(self) -> &'static str {
        match self {
            MetricKind::Bleu => BLEU_SIGNATURE,
            MetricKind::Chrf => CHRF_SIGNATURE,
            MetricKind::External => EXTERNAL_SIGNATURE,
        }
    }

    pub fn zero_stats(self) -> MetricStats {
        match self {
            MetricKind::Bleu => MetricStats::Bleu(BleuStats::default()),
            MetricKind::Chrf => MetricStats::Chrf(ChrfStats::default()),
            MetricKind::External => MetricStats::External { sum: 0.0, count: 0 },
        }
    }

    /// Sentence statistics from text. The external metric has no text-based
    /// statistics; use [`MetricStats::external`] instead.
    pub fn sentence_stats(self, hyp: &str, reference: &str) -> Result<MetricStats> {
        match self {
            MetricKind::Bleu => Ok(MetricStats::Bleu(bleu_stats(hyp, reference))),
            MetricKind::Chrf => Ok(MetricStats::Chrf(chrf_stats(hyp, reference))),
            MetricKind::External => Err(Error::invalid(
                "the external metric needs precomputed per-sentence scores",
            )),
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bleu" => Ok(MetricKind::Bleu),
            "chrf" | "chrf2" => Ok(MetricKind::Chrf),
            "external" => Ok(MetricKind::External),
            _ => Err(Error::UnknownMetric(s.to_string())),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Additive sufficient statistics of one metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MetricStats {
    Bleu(BleuStats),
    Chrf(ChrfStats),
    External { sum: f64, count: u64 },
}

impl MetricStats {
    pub fn external(score: f64) -> Self {
        MetricStats::External { sum: score, count: 1 }
    }

    pub fn kind(&self) -> MetricKind {
        match self {
            MetricStats::Bleu(_) => MetricKind::Bleu,
            MetricStats::Chrf(_) => MetricKind::Chrf,
            MetricStats::External { .. } => MetricKind::External,
        }
    }

    /// Corpus-level value (BLEU without effective order).
    pub fn score(&self) -> f64 {
        match self {
            MetricStats::Bleu(s) => bleu_from_stats(s, false),
            MetricStats::Chrf(s) => chrf_from_stats(s),
            MetricStats::External { sum, count } => {
                if *count == 0 {
                    0.0
                } else {
                    sum / *count as f64
                }
            }
        }
    }
}

impl AddAssign<&MetricStats> for MetricStats {
    fn add_assign(&mut self, rhs: &MetricStats) {
        match (self, rhs) {
            (MetricStats::Bleu(a), MetricStats::Bleu(b)) => *a += b,
            (MetricStats::Chrf(a), MetricStats::Chrf(b)) => *a += b,
            (MetricStats::External { sum, count }, MetricStats::External { sum: s, count: c }) => {
                *sum += s;
                *count += c;
            }
            (a, b) => panic!("adding {} statistics to {}", b.kind(), a.kind()),
        }
    }
}

impl SubAssign<&MetricStats> for MetricStats {
    fn sub_assign(&mut self, rhs: &MetricStats) {
        match (self, rhs) {
            (MetricStats::Bleu(a), MetricStats::Bleu(b)) => *a -= b,
            (MetricStats::Chrf(a), MetricStats::Chrf(b)) => *a -= b,
            (MetricStats::External { sum, count }, MetricStats::External { sum: s, count: c }) => {
                *sum -= s;
                *count -= c;
            }
            (a, b) => panic!("subtracting {} statistics from {}", b.kind(), a.kind()),
        }
    }
}

/// Sums a sequence of statistics of the given kind.
pub fn sum_stats<'a>(kind: MetricKind, stats: impl IntoIterator<Item = &'a MetricStats>) -> MetricStats {
    let mut total = kind.zero_stats();
    for s in stats {
        total += s;
    }
    total
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricScore {
    pub metric: MetricKind,
    pub value: f64,
    pub signature: String,
}

impl fmt::Display for MetricScore {
    /// `chrF2|nrefs:1|...|version:2.0.0 = 53.92`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}|{} = {:.2}",
            self.metric.display_name(),
            self.signature,
            self.value
        )
    }
}

/// A corpus score together with the per-sentence statistics it was built from.
#[derive(Clone, Debug)]
pub struct CorpusScore {
    pub score: MetricScore,
    pub sentence_stats: Vec<MetricStats>,
}

/// Per-sentence statistics for a whole corpus, computed in parallel.
///
/// `external` supplies one precomputed score per sentence and is required
/// for (and only used by) [`MetricKind::External`].
pub fn corpus_stats(
    kind: MetricKind,
    hyps: &[String],
    refs: &[String],
    external: Option<&[f64]>,
) -> Result<Vec<MetricStats>> {
    if hyps.len() != refs.len() {
        return Err(Error::LengthMismatch {
            what: "hypotheses and references",
            left: hyps.len(),
            right: refs.len(),
        });
    }
    match kind {
        MetricKind::External => {
            let scores =
                external.ok_or_else(|| Error::invalid("the external metric needs a per-sentence score file"))?;
            if scores.len() != hyps.len() {
                return Err(Error::LengthMismatch {
                    what: "external scores and hypotheses",
                    left: scores.len(),
                    right: hyps.len(),
                });
            }
            Ok(scores.iter().map(|&s| MetricStats::external(s)).collect())
        }
        _ => hyps
            .par_iter()
            .zip(refs.par_iter())
            .map(|(h, r)| kind.sentence_stats(h, r))
            .collect(),
    }
}

pub fn corpus_metric(
    kind: MetricKind,
    hyps: &[String],
    refs: &[String],
    external: Option<&[f64]>,
) -> Result<CorpusScore> {
    if refs.is_empty() {
        return Err(Error::invalid("empty reference corpus"));
    }
    let sentence_stats = corpus_stats(kind, hyps, refs, external)?;
    let value = sum_stats(kind, &sentence_stats).score();
    Ok(CorpusScore {
        score: MetricScore {
            metric: kind,
            value,
            signature: kind.signature().to_string(),
        },
        sentence_stats,
    })
}

/// Reads one real number per line.
pub fn read_scores<R: std::io::BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut scores = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let value: f64 = line
            .trim()
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("non-numeric score `{}`", line.trim())))?;
        scores.push(value);
    }
    Ok(scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_corpora_score_100() {
        let c = strings(&["Dobrý den.", "Як справи?", "To je ono!"]);
        for kind in [MetricKind::Bleu, MetricKind::Chrf] {
            let s = corpus_metric(kind, &c, &c, None).unwrap();
            assert!((s.score.value - 100.0).abs() < 1e-9, "{kind}");
        }
    }

    #[test]
    fn external_is_mean() {
        let h = strings(&["a", "b"]);
        let s = corpus_metric(MetricKind::External, &h, &h, Some(&[0.2, 0.4])).unwrap();
        assert!((s.score.value - 0.3).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let h = strings(&["a", "b"]);
        assert!(matches!(
            corpus_metric(MetricKind::Chrf, &h, &h[..1], None),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(corpus_metric(MetricKind::Bleu, &[], &[], None).is_err());
        assert!(matches!("ter".parse::<MetricKind>(), Err(Error::UnknownMetric(_))));
        assert!(corpus_metric(MetricKind::External, &h, &h, None).is_err());
    }

    #[test]
    fn display_carries_signature() {
        let c = strings(&["x y z"]);
        let s = corpus_metric(MetricKind::Chrf, &c, &c, None).unwrap();
        assert_eq!(
            s.score.to_string(),
            "chrF2|nrefs:1|case:mixed|eff:yes|nc:6|nw:0|space:no|version:2.0.0 = 100.00"
        );
    }

    fn word() -> impl Strategy<Value = String> {
        "[a-cčř]{1,4}"
    }

    fn sentence() -> impl Strategy<Value = String> {
        proptest::collection::vec(word(), 0..6).prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn scores_bounded_and_permutation_invariant(
            pairs in proptest::collection::vec((sentence(), sentence()), 1..8),
            rotate in 0usize..8,
        ) {
            let hyps: Vec<String> = pairs.iter().map(|p| p.0.clone()).collect();
            let refs: Vec<String> = pairs.iter().map(|p| p.1.clone()).collect();
            let mut rh = hyps.clone();
            let mut rr = refs.clone();
            let k = rotate % hyps.len();
            rh.rotate_left(k);
            rr.rotate_left(k);
            for kind in [MetricKind::Bleu, MetricKind::Chrf] {
                let a = corpus_metric(kind, &hyps, &refs, None).unwrap().score.value;
                let b = corpus_metric(kind, &rh, &rr, None).unwrap().score.value;
                prop_assert!((0.0..=100.0 + 1e-9).contains(&a));
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn stats_are_additive(
            a in proptest::collection::vec((sentence(), sentence()), 1..5),
            b in proptest::collection::vec((sentence(), sentence()), 1..5),
        ) {
            for kind in [MetricKind::Bleu, MetricKind::Chrf] {
                let stats = |v: &[(String, String)]| {
                    let h: Vec<String> = v.iter().map(|p| p.0.clone()).collect();
                    let r: Vec<String> = v.iter().map(|p| p.1.clone()).collect();
                    sum_stats(kind, &corpus_stats(kind, &h, &r, None).unwrap())
                };
                let mut sum = stats(&a);
                sum += &stats(&b);
                let joined: Vec<_> = a.iter().chain(&b).cloned().collect();
                prop_assert_eq!(sum, stats(&joined));
            }
        }
    }
}
