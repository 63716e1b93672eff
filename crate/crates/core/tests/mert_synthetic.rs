//! MERT against a coarse exhaustive grid on a synthetic 20-segment tuning set.

use mtkit_core::metrics::{corpus_metric, MetricKind};
use mtkit_core::nbest::{Hypothesis, NBestList, WeightVector};
use mtkit_core::reranker::{mert_tune, rescore, MertConfig, TuningSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOCAB: &[&str] = &[
    "dům", "strom", "řeka", "město", "kniha", "okno", "cesta", "voda", "hora", "most", "škola", "zahrada", "vlak",
    "pole", "les", "jezero", "lampa", "stůl", "dveře", "obraz",
];

fn synthetic_set(seed: u64) -> TuningSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut refs = Vec::new();
    let mut lists = Vec::new();
    for seg in 0..20 {
        let len = rng.gen_range(6..12);
        let reference: Vec<&str> = (0..len).map(|_| *VOCAB.choose(&mut rng).unwrap()).collect();
        let mut hyps = Vec::new();
        for _ in 0..12 {
            let mut words = reference.clone();
            let edits = rng.gen_range(0..5);
            for _ in 0..edits {
                let i = rng.gen_range(0..words.len());
                words[i] = VOCAB.choose(&mut rng).unwrap();
            }
            let dropped = rng.gen_range(0..3).min(words.len() - 1);
            words.truncate(words.len() - dropped);
            let quality = -(edits as f64) - dropped as f64 + rng.gen_range(-1.0..1.0);
            let length = words.len() as f64 / reference.len() as f64;
            hyps.push(
                Hypothesis::new(seg, words.join(" "))
                    .with_feature("quality", quality)
                    .with_feature("length", length)
                    .with_feature("noise", rng.gen_range(-2.0..2.0)),
            );
        }
        lists.push(NBestList::from_hypotheses(seg, hyps).unwrap());
        refs.push(reference.join(" "));
    }
    TuningSet::new(lists, &refs).unwrap()
}

fn corpus_bleu(ts: &TuningSet, w: &WeightVector) -> f64 {
    let hyps: Vec<String> = ts
        .lists
        .iter()
        .map(|l| rescore(l, w).unwrap().hypotheses[0].text.clone())
        .collect();
    corpus_metric(MetricKind::Bleu, &hyps, &ts.references, None)
        .unwrap()
        .score
        .value
}

#[test]
fn tuned_bleu_reaches_coarse_grid_best() {
    let ts = synthetic_set(42);
    let init = WeightVector::from_pairs([("quality", 0.0), ("length", 0.0), ("noise", 1.0)]).unwrap();
    let steps = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut grid_best = f64::NEG_INFINITY;
    for a in steps {
        for b in steps {
            for c in steps {
                if a == 0.0 && b == 0.0 && c == 0.0 {
                    continue;
                }
                let w = WeightVector::from_pairs([("quality", a), ("length", b), ("noise", c)]).unwrap();
                grid_best = grid_best.max(corpus_bleu(&ts, &w));
            }
        }
    }
    let config = MertConfig {
        metric: MetricKind::Bleu,
        restarts: 5,
        seed: 1,
        ..Default::default()
    };
    let out = mert_tune(&ts, &init, &config).unwrap();
    let init_bleu = corpus_bleu(&ts, &init);
    let tuned_bleu = corpus_bleu(&ts, &out.weights);
    assert!((out.initial_score - init_bleu).abs() < 1e-9);
    assert!((out.score - tuned_bleu).abs() < 1e-9);
    assert!(tuned_bleu >= init_bleu);
    assert!(tuned_bleu >= grid_best - 0.1, "tuned {tuned_bleu} vs grid {grid_best}");
}

#[test]
fn restarts_are_deterministic() {
    let ts = synthetic_set(7);
    let init = WeightVector::from_pairs([("quality", 0.1), ("length", 0.0), ("noise", 0.5)]).unwrap();
    let config = MertConfig {
        metric: MetricKind::Chrf,
        restarts: 3,
        seed: 9,
        ..Default::default()
    };
    let a = mert_tune(&ts, &init, &config).unwrap();
    let b = mert_tune(&ts, &init, &config).unwrap();
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.steps, b.steps);
    assert!(a.score >= a.initial_score);
}
