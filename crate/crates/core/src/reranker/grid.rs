//! Exhaustive grid search over model-combination weights.

use std::fmt;
use std::io::BufRead;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::{MetricKind, MetricStats};

use super::{argmax, mert::TuningSet};

/// Per-model scores for every hypothesis of a tuning set.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreColumns {
    pub labels: Vec<String>,
    /// `values[list][hypothesis][model]`.
    pub values: Vec<Vec<Vec<f64>>>,
}

impl ScoreColumns {
    /// Takes the named features of every hypothesis as model columns.
    pub fn from_features(ts: &TuningSet, labels: &[&str]) -> Result<Self> {
        let values = ts
            .lists
            .iter()
            .map(|list| {
                list.hypotheses
                    .iter()
                    .enumerate()
                    .map(|(index, h)| {
                        labels
                            .iter()
                            .map(|&l| {
                                h.feature(l).ok_or_else(|| Error::MissingFeature {
                                    segment: list.segment_id,
                                    index,
                                    feature: l.to_string(),
                                })
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Ok(ScoreColumns {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            values,
        })
    }

    /// Reads a TSV whose header names the models and whose rows follow the
    /// hypotheses of `ts` in order, list by list.
    pub fn read_tsv<R: BufRead>(reader: R, ts: &TuningSet) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::parse(1, "missing header row"))?;
        let labels: Vec<String> = header.trim_end_matches('\r').split('\t').map(str::to_string).collect();
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let row = line
                .split('\t')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .ok_or_else(|| Error::parse(n + 2, format!("bad score {v:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != labels.len() {
                return Err(Error::parse(
                    n + 2,
                    format!("expected {} columns, found {}", labels.len(), row.len()),
                ));
            }
            rows.push(row);
        }
        let expected: usize = ts.lists.iter().map(|l| l.len()).sum();
        if rows.len() != expected {
            return Err(Error::LengthMismatch {
                what: "score rows vs hypotheses",
                left: rows.len(),
                right: expected,
            });
        }
        let mut rows = rows.into_iter();
        let values = ts.lists.iter().map(|l| rows.by_ref().take(l.len()).collect()).collect();
        Ok(ScoreColumns { labels, values })
    }

    fn check_aligned(&self, ts: &TuningSet) -> Result<()> {
        if self.values.len() != ts.lists.len() {
            return Err(Error::LengthMismatch {
                what: "score columns vs lists",
                left: self.values.len(),
                right: ts.lists.len(),
            });
        }
        for (rows, list) in self.values.iter().zip(&ts.lists) {
            if rows.len() != list.len() {
                return Err(Error::LengthMismatch {
                    what: "score rows vs hypotheses",
                    left: rows.len(),
                    right: list.len(),
                });
            }
            if let Some(r) = rows.iter().find(|r| r.len() != self.labels.len()) {
                return Err(Error::LengthMismatch {
                    what: "score columns vs models",
                    left: r.len(),
                    right: self.labels.len(),
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleComponent {
    pub label: String,
    pub multiplicity: usize,
    pub weight: f64,
}

impl EnsembleComponent {
    pub fn effective_weight(&self) -> f64 {
        self.multiplicity as f64 * self.weight
    }
}

/// Weighted model combination, e.g. `1.0 · (2×A) + 0.8 · (B)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub components: Vec<EnsembleComponent>,
}

impl EnsembleSpec {
    pub fn new(components: Vec<EnsembleComponent>) -> Result<Self> {
        for c in &components {
            if !c.weight.is_finite() {
                return Err(Error::invalid(format!("weight of {} is not finite", c.label)));
            }
            if c.multiplicity == 0 {
                return Err(Error::invalid(format!(
                    "multiplicity of {} must be at least 1",
                    c.label
                )));
            }
        }
        Ok(EnsembleSpec { components })
    }
}

fn format_weight(w: f64) -> String {
    if w.fract() == 0.0 && w.abs() < 1e15 {
        format!("{w:.1}")
    } else {
        w.to_string()
    }
}

impl fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.components.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if c.multiplicity > 1 {
                write!(f, "{} · ({}×{})", format_weight(c.weight), c.multiplicity, c.label)?;
            } else {
                write!(f, "{} · ({})", format_weight(c.weight), c.label)?;
            }
        }
        Ok(())
    }
}

/// One model's axis of the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridAxis {
    pub label: String,
    pub multiplicity: usize,
    pub values: Vec<f64>,
}

impl GridAxis {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        GridAxis {
            label: label.into(),
            multiplicity: 1,
            values,
        }
    }

    /// Parses `name=v1,v2,...`; an optional `k×`/`kx` prefix on the name sets the multiplicity.
    pub fn parse(spec: &str) -> Result<Self> {
        let (name, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("grid axis {spec:?} is not name=v1,v2,...")))?;
        let values = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::invalid(format!("bad grid value {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let name = name.trim();
        let (multiplicity, label) = match name.split_once(['×', 'x']) {
            Some((k, rest)) if !k.is_empty() && k.chars().all(|c| c.is_ascii_digit()) => (
                k.parse()
                    .map_err(|_| Error::invalid(format!("bad multiplicity in {name:?}")))?,
                rest,
            ),
            _ => (1, name),
        };
        if multiplicity == 0 || label.is_empty() {
            return Err(Error::invalid(format!("bad grid axis name {name:?}")));
        }
        Ok(GridAxis {
            label: label.to_string(),
            multiplicity,
            values,
        })
    }
}

#[derive(Clone, Debug)]
pub struct GridOutcome {
    pub spec: EnsembleSpec,
    pub score: f64,
    /// Every evaluated weight tuple with its corpus metric, in enumeration order.
    pub evaluated: Vec<(Vec<f64>, f64)>,
}

/// Evaluates every weight tuple of the grid and returns the one whose 1-best
/// output has the highest corpus metric. Axis values are sorted and deduped;
/// tuples are enumerated lexicographically and the first maximum wins.
pub fn grid_search_weights(
    columns: &ScoreColumns,
    grid: &[GridAxis],
    ts: &TuningSet,
    metric: MetricKind,
    external_feature: Option<&str>,
) -> Result<GridOutcome> {
    if grid.is_empty() || grid.iter().any(|a| a.values.is_empty()) {
        return Err(Error::invalid("grid is empty"));
    }
    if ts.is_empty() {
        return Err(Error::invalid("empty tuning set"));
    }
    columns.check_aligned(ts)?;
    let model_index = grid
        .iter()
        .map(|a| {
            columns
                .labels
                .iter()
                .position(|l| *l == a.label)
                .ok_or_else(|| Error::invalid(format!("no score column for model {}", a.label)))
        })
        .collect::<Result<Vec<_>>>()?;
    let axes: Vec<Vec<f64>> = grid
        .iter()
        .map(|a| {
            let mut v = a.values.clone();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    let stats: Vec<Vec<MetricStats>> = ts.hypothesis_stats(metric, external_feature)?;

    let total: usize = axes.iter().map(Vec::len).product();
    let tuple_at = |mut n: usize| -> Vec<f64> {
        let mut t = vec![0.0; axes.len()];
        for (slot, axis) in t.iter_mut().zip(&axes).rev() {
            *slot = axis[n % axis.len()];
            n /= axis.len();
        }
        t
    };
    let evaluated: Vec<(Vec<f64>, f64)> = (0..total)
        .into_par_iter()
        .map(|n| {
            let tuple = tuple_at(n);
            let effective: Vec<f64> = tuple.iter().zip(grid).map(|(w, a)| w * a.multiplicity as f64).collect();
            let mut sum = metric.zero_stats();
            for (rows, seg_stats) in columns.values.iter().zip(&stats) {
                let scores: Vec<f64> = rows
                    .iter()
                    .map(|row| effective.iter().zip(&model_index).map(|(w, &m)| w * row[m]).sum())
                    .collect();
                if let Some(best) = argmax(&scores) {
                    sum += &seg_stats[best];
                }
            }
            (tuple, sum.score())
        })
        .collect();

    let mut best = 0;
    for (i, (_, s)) in evaluated.iter().enumerate() {
        if *s > evaluated[best].1 {
            best = i;
        }
    }
    let spec = EnsembleSpec::new(
        grid.iter()
            .zip(&evaluated[best].0)
            .map(|(a, &weight)| EnsembleComponent {
                label: a.label.clone(),
                multiplicity: a.multiplicity,
                weight,
            })
            .collect(),
    )?;
    Ok(GridOutcome {
        spec,
        score: evaluated[best].1,
        evaluated,
    })
}
