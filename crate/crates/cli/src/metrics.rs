use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Subcommand;
use mtkit_core::metrics::{corpus_metric, corpus_stats, paired_bootstrap_stats, read_scores, MetricKind};

use crate::io;

#[derive(Subcommand, Debug)]
pub enum MetricsCmd {
    /// Corpus score with its signature.
    Score {
        /// bleu, chrf or external.
        #[arg(long, default_value = "bleu")]
        metric: MetricKind,
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// Per-sentence scores for the external metric, one per line.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Paired bootstrap resampling between two systems.
    Bootstrap {
        #[arg(long, default_value = "bleu")]
        metric: MetricKind,
        #[arg(long)]
        sys_a: PathBuf,
        #[arg(long)]
        sys_b: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        /// External per-sentence scores of system A.
        #[arg(long)]
        scores_a: Option<PathBuf>,
        /// External per-sentence scores of system B.
        #[arg(long)]
        scores_b: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
}

fn external(metric: MetricKind, path: Option<&PathBuf>, flag: &str) -> Result<Option<Vec<f64>>> {
    match (metric, path) {
        (MetricKind::External, Some(p)) => Ok(Some(io::read_with(p, read_scores)?)),
        (MetricKind::External, None) => Err(crate::usage(format!("the external metric needs {flag}"))),
        _ => Ok(None),
    }
}

pub fn run(cmd: MetricsCmd, seed: u64) -> Result<()> {
    let mut out = io::stdout();
    match cmd {
        MetricsCmd::Score {
            metric,
            hyp,
            reference,
            scores,
        } => {
            let ext = external(metric, scores.as_ref(), "--scores")?;
            let hyps = io::lines(&hyp)?;
            let refs = io::lines(&reference)?;
            let score = corpus_metric(metric, &hyps, &refs, ext.as_deref())?;
            writeln!(out, "{}", score.score)?;
        }
        MetricsCmd::Bootstrap {
            metric,
            sys_a,
            sys_b,
            reference,
            scores_a,
            scores_b,
            trials,
        } => {
            let ext_a = external(metric, scores_a.as_ref(), "--scores-a")?;
            let ext_b = external(metric, scores_b.as_ref(), "--scores-b")?;
            let a = io::lines(&sys_a)?;
            let b = io::lines(&sys_b)?;
            let refs = io::lines(&reference)?;
            let stats_a = corpus_stats(metric, &a, &refs, ext_a.as_deref())?;
            let stats_b = corpus_stats(metric, &b, &refs, ext_b.as_deref())?;
            let r = paired_bootstrap_stats(&stats_a, &stats_b, trials, seed)?;
            writeln!(out, "metric={}|{}", metric.display_name(), metric.signature())?;
            writeln!(out, "score_a={:.4}", r.score_a)?;
            writeln!(out, "score_b={:.4}", r.score_b)?;
            writeln!(out, "p_value={:.4}", r.p_value)?;
            writeln!(out, "trials={}", r.trials)?;
            writeln!(out, "seed={seed}")?;
        }
    }
    out.flush()?;
    Ok(())
}
