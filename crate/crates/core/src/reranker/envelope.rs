//! Upper envelope of a set of lines, the core of MERT's exact line search.
//!
//! Each hypothesis contributes the line `score(γ) = intercept + γ · slope`.
//! The envelope partitions the real line into maximal intervals, each with a
//! single winning hypothesis.

use crate::error::{Error, Result};
use crate::nbest::{NBestList, WeightVector};

use super::linear_scores;

#[derive(Clone, Debug, PartialEq)]
pub struct Envelope {
    /// Left boundaries of intervals `1..`; interval 0 starts at −∞.
    boundaries: Vec<f64>,
    /// Winning line index per interval.
    argmax: Vec<usize>,
}

impl Envelope {
    /// Builds the envelope of `(slope, intercept)` lines.
    ///
    /// Among identical lines the lowest index wins, which matches the
    /// rank-based tie-break of rescoring. Returns an empty envelope for no lines.
    pub fn from_lines(lines: &[(f64, f64)]) -> Envelope {
        let mut order: Vec<usize> = (0..lines.len()).collect();
        // slope ascending; within equal slopes the best intercept (then lowest index) first
        order.sort_by(|&a, &b| {
            lines[a]
                .0
                .total_cmp(&lines[b].0)
                .then(lines[b].1.total_cmp(&lines[a].1))
                .then(a.cmp(&b))
        });

        let mut hull: Vec<(f64, usize)> = Vec::new(); // (start, line)
        let mut last_slope: Option<f64> = None;
        for idx in order {
            let (slope, intercept) = lines[idx];
            if last_slope == Some(slope) {
                continue;
            }
            last_slope = Some(slope);
            loop {
                let Some(&(start, top)) = hull.last() else {
                    hull.push((f64::NEG_INFINITY, idx));
                    break;
                };
                let (top_slope, top_intercept) = lines[top];
                let cross = (top_intercept - intercept) / (slope - top_slope);
                if cross <= start {
                    hull.pop();
                } else {
                    hull.push((cross, idx));
                    break;
                }
            }
        }

        Envelope {
            boundaries: hull.iter().skip(1).map(|&(start, _)| start).collect(),
            argmax: hull.iter().map(|&(_, idx)| idx).collect(),
        }
    }

    /// Number of intervals.
    pub fn len(&self) -> usize {
        self.argmax.len()
    }

    pub fn is_empty(&self) -> bool {
        self.argmax.is_empty()
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn winners(&self) -> &[usize] {
        &self.argmax
    }

    /// `(lower, upper, winner)` for every interval; the outer bounds are infinite.
    pub fn intervals(&self) -> Vec<(f64, f64, usize)> {
        (0..self.argmax.len())
            .map(|i| {
                let lo = if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    self.boundaries[i - 1]
                };
                let hi = self.boundaries.get(i).copied().unwrap_or(f64::INFINITY);
                (lo, hi, self.argmax[i])
            })
            .collect()
    }

    /// Winner at `gamma`. Boundary points belong to the interval on their right.
    pub fn argmax_at(&self, gamma: f64) -> Option<usize> {
        if self.argmax.is_empty() {
            return None;
        }
        let i = self.boundaries.partition_point(|&b| b <= gamma);
        Some(self.argmax[i])
    }
}

/// Envelope of `dot(weights, features) + γ · features[direction]` over the list.
pub fn line_envelope(list: &NBestList, weights: &WeightVector, direction: &str) -> Result<Envelope> {
    let intercepts = linear_scores(list, weights)?;
    let lines = list
        .hypotheses
        .iter()
        .zip(intercepts)
        .enumerate()
        .map(|(index, (h, intercept))| {
            h.feature(direction)
                .map(|slope| (slope, intercept))
                .ok_or_else(|| Error::MissingFeature {
                    segment: list.segment_id,
                    index,
                    feature: direction.to_string(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Envelope::from_lines(&lines))
}
