//! Linear rescoring of n-best lists and the tuners that fit its weights.

mod envelope;
mod grid;
mod mert;

use crate::error::{Error, Result};
use crate::nbest::{NBestList, WeightVector};

pub use envelope::{line_envelope, Envelope};
pub use grid::{grid_search_weights, EnsembleComponent, EnsembleSpec, GridAxis, GridOutcome, ScoreColumns};
pub use mert::{mert_tune, MertConfig, MertOutcome, MertStep, TuningSet};

/// Weighted feature sums for every hypothesis, in list order.
pub fn linear_scores(list: &NBestList, weights: &WeightVector) -> Result<Vec<f64>> {
    list.hypotheses
        .iter()
        .enumerate()
        .map(|(index, h)| {
            weights.dot(&h.features).map_err(|feature| Error::MissingFeature {
                segment: list.segment_id,
                index,
                feature,
            })
        })
        .collect()
}

/// Index of the best-scoring hypothesis; the earliest one wins ties.
pub(crate) fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some(b) if scores[b] >= s => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Sets `combined_score = Σ w_f · feature_f` and sorts descending.
/// The sort is stable, so equal scores keep their original rank.
pub fn rescore(list: &NBestList, weights: &WeightVector) -> Result<NBestList> {
    let scores = linear_scores(list, weights)?;
    let mut hypotheses: Vec<_> = list
        .hypotheses
        .iter()
        .zip(scores)
        .map(|(h, s)| {
            let mut h = h.clone();
            h.combined_score = s;
            h
        })
        .collect();
    hypotheses.sort_by(|a, b| b.combined_score.total_cmp(&a.combined_score));
    Ok(NBestList {
        segment_id: list.segment_id,
        hypotheses,
    })
}

/// Rescores and keeps the `k` best hypotheses.
pub fn prune_topk(list: &NBestList, weights: &WeightVector, k: usize) -> Result<NBestList> {
    if k == 0 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let mut rescored = rescore(list, weights)?;
    rescored.hypotheses.truncate(k);
    Ok(rescored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbest::Hypothesis;
    use proptest::prelude::*;

    fn list(rows: &[(&str, &[(&str, f64)])]) -> NBestList {
        NBestList {
            segment_id: 0,
            hypotheses: rows
                .iter()
                .map(|(text, feats)| {
                    feats
                        .iter()
                        .fold(Hypothesis::new(0, *text), |h, (n, v)| h.with_feature(*n, *v))
                })
                .collect(),
        }
    }

    fn texts(l: &NBestList) -> Vec<&str> {
        l.texts()
    }

    #[test]
    fn single_feature_orders_by_it() {
        let l = list(&[("a", &[("lm", -3.0)]), ("b", &[("lm", -1.0)]), ("c", &[("lm", -2.0)])]);
        let w = WeightVector::from_pairs([("lm", 1.0)]).unwrap();
        let r = rescore(&l, &w).unwrap();
        assert_eq!(texts(&r), ["b", "c", "a"]);
        assert_eq!(r.hypotheses[0].combined_score, -1.0);
        assert_eq!(texts(&rescore(&l, &w.scaled(7.5)).unwrap()), ["b", "c", "a"]);
    }

    #[test]
    fn two_features_match_exhaustive_evaluation() {
        let l = list(&[
            ("a", &[("lm", -1.0), ("qe", 0.2)]),
            ("b", &[("lm", -2.0), ("qe", 0.9)]),
            ("c", &[("lm", -1.5), ("qe", 0.5)]),
        ]);
        let w = WeightVector::from_pairs([("lm", 0.5), ("qe", 2.0)]).unwrap();
        // a: -0.5 + 0.4 = -0.1, b: -1.0 + 1.8 = 0.8, c: -0.75 + 1.0 = 0.25
        assert_eq!(texts(&rescore(&l, &w).unwrap()), ["b", "c", "a"]);
    }

    #[test]
    fn ties_keep_original_rank() {
        let l = list(&[("a", &[("f", 1.0)]), ("b", &[("f", 2.0)]), ("c", &[("f", 1.0)])]);
        let w = WeightVector::from_pairs([("f", 1.0)]).unwrap();
        assert_eq!(texts(&rescore(&l, &w).unwrap()), ["b", "a", "c"]);
    }

    #[test]
    fn missing_feature_is_named() {
        let l = list(&[("a", &[("lm", 1.0)]), ("b", &[])]);
        let w = WeightVector::from_pairs([("lm", 1.0)]).unwrap();
        let err = rescore(&l, &w).unwrap_err();
        assert!(matches!(err, Error::MissingFeature { index: 1, ref feature, .. } if feature == "lm"));
    }

    #[test]
    fn prune_keeps_k() {
        let rows: Vec<(String, f64)> = (0..250).map(|i| (format!("h{i}"), ((i * 37) % 250) as f64)).collect();
        let l = NBestList {
            segment_id: 0,
            hypotheses: rows
                .iter()
                .map(|(t, v)| Hypothesis::new(0, t.clone()).with_feature("f", *v))
                .collect(),
        };
        let w = WeightVector::from_pairs([("f", 1.0)]).unwrap();
        let pruned = prune_topk(&l, &w, 50).unwrap();
        assert_eq!(pruned.len(), 50);
        let mut all: Vec<f64> = rows.iter().map(|r| r.1).collect();
        all.sort_by(|a, b| b.total_cmp(a));
        let kept: Vec<f64> = pruned.hypotheses.iter().map(|h| h.combined_score).collect();
        assert_eq!(kept, all[..50]);
        assert_eq!(prune_topk(&l, &w, 1000).unwrap().len(), 250);
        assert!(prune_topk(&l, &w, 0).is_err());
    }

    fn arb_list() -> impl Strategy<Value = NBestList> {
        proptest::collection::vec((-16i32..16, -16i32..16), 1..12).prop_map(|rows| NBestList {
            segment_id: 0,
            hypotheses: rows
                .iter()
                .enumerate()
                .map(|(i, (a, b))| {
                    Hypothesis::new(0, format!("h{i}"))
                        .with_feature("a", *a as f64 / 8.0)
                        .with_feature("b", *b as f64 / 8.0)
                })
                .collect(),
        })
    }

    proptest! {
        #[test]
        fn argmax_invariances(l in arb_list(), wa in -4i32..4, wb in 1i32..4, scale in 1i32..9, shift in -8i32..8) {
            let w = WeightVector::from_pairs([("a", wa as f64 / 4.0), ("b", wb as f64 / 4.0)]).unwrap();
            let base: Vec<String> = texts(&rescore(&l, &w).unwrap()).iter().map(|s| s.to_string()).collect();
            let scaled = rescore(&l, &w.scaled(scale as f64 / 2.0)).unwrap();
            prop_assert_eq!(&texts(&scaled), &base);
            let mut shifted = l.clone();
            for h in &mut shifted.hypotheses {
                *h.features.get_mut("a").unwrap() += shift as f64;
            }
            let shifted = rescore(&shifted, &w).unwrap();
            prop_assert_eq!(&texts(&shifted), &base);
        }

        #[test]
        fn prune_composes(l in arb_list(), k1 in 1usize..12, k2 in 1usize..12) {
            let w = WeightVector::from_pairs([("a", 1.0), ("b", 0.5)]).unwrap();
            let twice = prune_topk(&prune_topk(&l, &w, k1).unwrap(), &w, k2).unwrap();
            let once = prune_topk(&l, &w, k1.min(k2)).unwrap();
            prop_assert_eq!(texts(&twice), texts(&once));
        }
    }
}
