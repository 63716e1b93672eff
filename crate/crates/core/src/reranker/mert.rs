//! Minimum error rate training.
//!
//! Coordinate ascent with exact line search: for each feature direction the
//! per-segment envelopes are merged into one sweep over γ, the corpus metric
//! is evaluated on every interval from summed sufficient statistics, and the
//! best interval's midpoint becomes the candidate step. Each iteration takes
//! the single best direction; training stops when no direction improves the
//! corpus metric by more than the tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{MetricKind, MetricStats};
use crate::nbest::{NBestList, WeightVector};

use super::{argmax, envelope::Envelope, linear_scores};

/// N-best lists paired with their references.
#[derive(Clone, Debug)]
pub struct TuningSet {
    pub lists: Vec<NBestList>,
    /// `references[i]` belongs to `lists[i]`.
    pub references: Vec<String>,
}

impl TuningSet {
    /// Pairs each list with `references_by_segment[list.segment_id]`.
    pub fn new(lists: Vec<NBestList>, references_by_segment: &[String]) -> Result<Self> {
        let references = lists
            .iter()
            .map(|l| {
                references_by_segment
                    .get(l.segment_id)
                    .cloned()
                    .ok_or_else(|| Error::invalid(format!("no reference for segment {}", l.segment_id)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TuningSet { lists, references })
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Sentence statistics for every hypothesis. For the external metric the
    /// per-hypothesis score is read from the named feature.
    pub fn hypothesis_stats(
        &self,
        metric: MetricKind,
        external_feature: Option<&str>,
    ) -> Result<Vec<Vec<MetricStats>>> {
        self.lists
            .par_iter()
            .zip(self.references.par_iter())
            .map(|(list, reference)| {
                list.hypotheses
                    .iter()
                    .enumerate()
                    .map(|(index, h)| match metric {
                        MetricKind::External => {
                            let name = external_feature
                                .ok_or_else(|| Error::invalid("external metric needs a score feature name"))?;
                            h.feature(name)
                                .map(MetricStats::external)
                                .ok_or_else(|| Error::MissingFeature {
                                    segment: list.segment_id,
                                    index,
                                    feature: name.to_string(),
                                })
                        }
                        _ => metric.sentence_stats(&h.text, reference),
                    })
                    .collect()
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct MertConfig {
    pub metric: MetricKind,
    /// Feature holding per-hypothesis scores when `metric` is external.
    pub external_feature: Option<String>,
    pub restarts: usize,
    pub seed: u64,
    /// Minimum metric gain for a step to be accepted.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MertConfig {
    fn default() -> Self {
        MertConfig {
            metric: MetricKind::Bleu,
            external_feature: None,
            restarts: 1,
            seed: 0,
            tolerance: 1e-4,
            max_iterations: 100,
        }
    }
}

/// One accepted coordinate step.
#[derive(Clone, Debug, PartialEq)]
pub struct MertStep {
    pub restart: usize,
    pub iteration: usize,
    pub feature: String,
    pub gamma: f64,
    pub metric: f64,
}

#[derive(Clone, Debug)]
pub struct MertOutcome {
    pub weights: WeightVector,
    pub score: f64,
    pub initial_score: f64,
    pub steps: Vec<MertStep>,
}

impl MertOutcome {
    /// Tuning report as TSV: restart, iteration, feature, gamma, metric.
    pub fn report_tsv(&self) -> String {
        let mut out = String::from("restart\titeration\tfeature\tgamma\tmetric\n");
        for s in &self.steps {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{:.6}\n",
                s.restart, s.iteration, s.feature, s.gamma, s.metric
            ));
        }
        out
    }
}

struct Problem<'a> {
    ts: &'a TuningSet,
    stats: Vec<Vec<MetricStats>>,
    features: Vec<String>,
    metric: MetricKind,
}

impl Problem<'_> {
    fn score(&self, weights: &WeightVector) -> Result<f64> {
        let mut total = self.metric.zero_stats();
        for (list, stats) in self.ts.lists.iter().zip(&self.stats) {
            let scores = linear_scores(list, weights)?;
            if let Some(best) = argmax(&scores) {
                total += &stats[best];
            }
        }
        Ok(total.score())
    }

    /// Best `(γ, metric)` along `direction`, moving from the current weights.
    fn line_search(&self, weights: &WeightVector, direction: &str) -> Result<(f64, f64)> {
        let envelopes = self
            .ts
            .lists
            .par_iter()
            .map(|list| {
                let intercepts = linear_scores(list, weights)?;
                let lines: Vec<(f64, f64)> = list
                    .hypotheses
                    .iter()
                    .zip(intercepts)
                    .map(|(h, b)| (h.feature(direction).unwrap_or(0.0), b))
                    .collect();
                Ok(Envelope::from_lines(&lines))
            })
            .collect::<Result<Vec<_>>>()?;

        let mut current = self.metric.zero_stats();
        // (boundary, segment, winner before, winner after)
        let mut events: Vec<(f64, usize, usize, usize)> = Vec::new();
        for (seg, env) in envelopes.iter().enumerate() {
            let Some(&first) = env.winners().first() else {
                continue;
            };
            current += &self.stats[seg][first];
            for (i, &b) in env.boundaries().iter().enumerate() {
                events.push((b, seg, env.winners()[i], env.winners()[i + 1]));
            }
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let pick = |lo: f64, hi: f64| -> f64 {
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => 0.5 * (lo + hi),
                (false, true) => hi - 1.0,
                (true, false) => lo + 1.0,
                (false, false) => 0.0,
            }
        };
        let mut best_gamma = 0.0_f64;
        let mut best_score = f64::NEG_INFINITY;
        let mut consider = |lo: f64, hi: f64, score: f64| {
            let gamma = pick(lo, hi);
            if score > best_score || (score == best_score && gamma.abs() < best_gamma.abs()) {
                best_score = score;
                best_gamma = gamma;
            }
        };

        let mut lo = f64::NEG_INFINITY;
        let mut i = 0;
        while i < events.len() {
            let boundary = events[i].0;
            consider(lo, boundary, current.score());
            while i < events.len() && events[i].0 == boundary {
                let (_, seg, from, to) = events[i];
                current -= &self.stats[seg][from];
                current += &self.stats[seg][to];
                i += 1;
            }
            lo = boundary;
        }
        consider(lo, f64::INFINITY, current.score());
        Ok((best_gamma, best_score))
    }

    fn optimize(
        &self,
        mut weights: WeightVector,
        restart: usize,
        config: &MertConfig,
        steps: &mut Vec<MertStep>,
    ) -> Result<(WeightVector, f64)> {
        let mut score = self.score(&weights)?;
        for iteration in 0..config.max_iterations {
            let mut best: Option<(usize, f64, f64)> = None;
            for (d, feature) in self.features.iter().enumerate() {
                let (gamma, s) = self.line_search(&weights, feature)?;
                if best.is_none_or(|(_, _, bs)| s > bs) {
                    best = Some((d, gamma, s));
                }
            }
            let Some((d, gamma, s)) = best else { break };
            if s <= score + config.tolerance {
                break;
            }
            let feature = &self.features[d];
            let mut next = weights.clone();
            next.set(feature, weights.get(feature).unwrap_or(0.0) + gamma);
            let next_score = self.score(&next)?;
            if next_score <= score {
                // numerically degenerate interval; nothing left to gain
                break;
            }
            weights = next;
            score = next_score;
            steps.push(MertStep {
                restart,
                iteration,
                feature: feature.clone(),
                gamma,
                metric: score,
            });
        }
        Ok((weights, score))
    }
}

/// Tunes `init` on `ts`. Restart 0 starts from `init`; later restarts draw
/// every weight uniformly from [−1, 1]. The best result over all restarts is
/// returned, so the tuned score is never below the score at `init`.
pub fn mert_tune(ts: &TuningSet, init: &WeightVector, config: &MertConfig) -> Result<MertOutcome> {
    if ts.is_empty() || ts.lists.iter().all(NBestList::is_empty) {
        return Err(Error::invalid("empty tuning set"));
    }
    if config.restarts == 0 {
        return Err(Error::invalid("restarts must be at least 1"));
    }
    let features: Vec<String> = init.names().map(str::to_string).collect();
    for list in &ts.lists {
        for (index, h) in list.hypotheses.iter().enumerate() {
            if let Some(f) = features.iter().find(|f| !h.features.contains_key(*f)) {
                return Err(Error::MissingFeature {
                    segment: list.segment_id,
                    index,
                    feature: f.clone(),
                });
            }
        }
    }
    let problem = Problem {
        ts,
        stats: ts.hypothesis_stats(config.metric, config.external_feature.as_deref())?,
        features,
        metric: config.metric,
    };

    let initial_score = problem.score(init)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut steps = Vec::new();
    let mut best: Option<(WeightVector, f64)> = None;
    for restart in 0..config.restarts {
        let start = if restart == 0 {
            init.clone()
        } else {
            let mut w = init.clone();
            for f in &problem.features {
                w.set(f, rng.gen_range(-1.0..=1.0));
            }
            w
        };
        let (w, s) = problem.optimize(start, restart, config, &mut steps)?;
        if best.as_ref().is_none_or(|(_, bs)| s > *bs) {
            best = Some((w, s));
        }
    }
    let (weights, score) = best.expect("at least one restart");
    Ok(MertOutcome {
        weights,
        score,
        initial_score,
        steps,
    })
}
