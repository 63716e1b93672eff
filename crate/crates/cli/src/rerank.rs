use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Subcommand;
use mtkit_core::metrics::MetricKind;
use mtkit_core::nbest::{write_nbest, NBestList, Origin};
use mtkit_core::reranker::{
    grid_search_weights, mert_tune, prune_topk, rescore, GridAxis, MertConfig, ScoreColumns, TuningSet,
};

use crate::io;

#[derive(Subcommand, Debug)]
pub enum RerankCmd {
    /// MERT: tune feature weights on an n-best list against references.
    Tune {
        #[arg(long)]
        nbest: PathBuf,
        /// One reference per segment id, line i for segment i.
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Initial weights; also fixes the tuned feature set.
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value = "bleu")]
        metric: MetricKind,
        /// Feature holding per-hypothesis scores for the external metric.
        #[arg(long)]
        external_feature: Option<String>,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 100)]
        max_iterations: usize,
        /// Where to write the tuned weights.
        #[arg(long)]
        out: PathBuf,
    },
    /// Rescore with fixed weights and print each segment's 1-best text.
    Apply {
        #[arg(long)]
        nbest: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        /// Print the full rescored n-best list instead of 1-best texts.
        #[arg(long)]
        full: bool,
    },
    /// Keep the k best hypotheses of every segment.
    Prune {
        #[arg(long)]
        nbest: PathBuf,
        #[arg(long)]
        weights: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Exhaustive grid search over ensemble model weights.
    Grid {
        #[arg(long)]
        nbest: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Axis as `name=v1,v2,...`, optionally `2xname=...` for a model used twice.
        #[arg(long = "grid", required = true)]
        grid: Vec<String>,
        /// Per-model scores, header row of model names then one row per hypothesis.
        /// Without it the models are read from the n-best features of the same name.
        #[arg(long)]
        scores: Option<PathBuf>,
        #[arg(long, default_value = "bleu")]
        metric: MetricKind,
        #[arg(long)]
        external_feature: Option<String>,
        /// Write every evaluated weight tuple with its metric as TSV.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn tuning_set(nbest: &Path, reference: &Path) -> Result<TuningSet> {
    let lists = io::nbest(nbest, Origin::Other)?;
    let refs = io::lines(reference)?;
    TuningSet::new(lists, &refs).with_context(|| reference.display().to_string())
}

fn per_list(
    lists: &[NBestList],
    f: impl Fn(&NBestList) -> mtkit_core::Result<NBestList> + Sync + Send,
) -> Result<Vec<NBestList>> {
    use rayon::prelude::*;
    Ok(lists.par_iter().map(f).collect::<mtkit_core::Result<Vec<_>>>()?)
}

pub fn run(cmd: RerankCmd, seed: u64) -> Result<()> {
    let mut out = io::stdout();
    match cmd {
        RerankCmd::Tune {
            nbest,
            reference,
            weights,
            metric,
            external_feature,
            restarts,
            max_iterations,
            out: weights_out,
        } => {
            let ts = tuning_set(&nbest, &reference)?;
            let init = io::weights(&weights)?;
            let config = MertConfig {
                metric,
                external_feature,
                restarts,
                seed,
                max_iterations,
                ..MertConfig::default()
            };
            let outcome = mert_tune(&ts, &init, &config)?;
            log::info!("{}: {:.4} -> {:.4}", metric, outcome.initial_score, outcome.score);
            let mut w = io::create(&weights_out)?;
            outcome.weights.write(&mut w)?;
            w.flush()?;
            out.write_all(outcome.report_tsv().as_bytes())?;
        }
        RerankCmd::Apply { nbest, weights, full } => {
            let lists = io::nbest(&nbest, Origin::Other)?;
            let w = io::weights(&weights)?;
            let ranked = per_list(&lists, |l| rescore(l, &w))?;
            if full {
                write_nbest(&ranked, &mut out)?;
            } else {
                for l in &ranked {
                    writeln!(out, "{}", l.hypotheses.first().map_or("", |h| h.text.as_str()))?;
                }
            }
        }
        RerankCmd::Prune { nbest, weights, k } => {
            let lists = io::nbest(&nbest, Origin::Other)?;
            let w = io::weights(&weights)?;
            let pruned = per_list(&lists, |l| prune_topk(l, &w, k))?;
            write_nbest(&pruned, &mut out)?;
        }
        RerankCmd::Grid {
            nbest,
            reference,
            grid,
            scores,
            metric,
            external_feature,
            report,
        } => {
            let axes = grid
                .iter()
                .map(|g| GridAxis::parse(g).map_err(|e| crate::usage(format!("--grid {g}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let ts = tuning_set(&nbest, &reference)?;
            let columns = match &scores {
                Some(p) => io::read_with(p, |r| ScoreColumns::read_tsv(r, &ts))?,
                None => {
                    let labels: Vec<&str> = axes.iter().map(|a| a.label.as_str()).collect();
                    ScoreColumns::from_features(&ts, &labels).with_context(|| nbest.display().to_string())?
                }
            };
            let outcome = grid_search_weights(&columns, &axes, &ts, metric, external_feature.as_deref())?;
            if let Some(path) = report {
                let mut r = io::create(&path)?;
                let labels: Vec<&str> = axes.iter().map(|a| a.label.as_str()).collect();
                writeln!(r, "{}\t{}", labels.join("\t"), metric)?;
                for (tuple, value) in &outcome.evaluated {
                    let cells: Vec<String> = tuple.iter().map(f64::to_string).collect();
                    writeln!(r, "{}\t{:.6}", cells.join("\t"), value)?;
                }
                r.flush()?;
            }
            writeln!(out, "best={}", outcome.spec)?;
            writeln!(out, "{}={:.4}", metric, outcome.score)?;
            writeln!(out, "evaluated={}", outcome.evaluated.len())?;
        }
    }
    out.flush()?;
    Ok(())
}
