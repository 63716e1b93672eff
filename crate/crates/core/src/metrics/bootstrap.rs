//! Paired bootstrap resampling.
//!
//! Segment indices are resampled with replacement at full corpus size. The
//! p-value is the fraction of resamples in which the system that won on the
//! full corpus does not strictly win. Trial `t` draws from a ChaCha8 stream
//! keyed by `(seed, t)`, so results do not depend on how trials are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{corpus_stats, sum_stats, MetricKind, MetricStats};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapResult {
    pub score_a: f64,
    pub score_b: f64,
    pub p_value: f64,
    pub trials: usize,
}

pub fn paired_bootstrap_stats(
    stats_a: &[MetricStats],
    stats_b: &[MetricStats],
    trials: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if stats_a.len() != stats_b.len() {
        return Err(Error::LengthMismatch {
            what: "bootstrap systems",
            left: stats_a.len(),
            right: stats_b.len(),
        });
    }
    if trials == 0 {
        return Err(Error::invalid("bootstrap needs at least one trial"));
    }
    let n = stats_a.len();
    if n == 0 {
        return Err(Error::invalid("bootstrap needs a non-empty corpus"));
    }
    let kind = stats_a[0].kind();
    let score_a = sum_stats(kind, stats_a).score();
    let score_b = sum_stats(kind, stats_b).score();

    if score_a == score_b {
        return Ok(BootstrapResult {
            score_a,
            score_b,
            p_value: 1.0,
            trials,
        });
    }
    let a_wins = score_a > score_b;

    let losses: usize = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let mut sample_a = kind.zero_stats();
            let mut sample_b = kind.zero_stats();
            for _ in 0..n {
                let i = rng.gen_range(0..n);
                sample_a += &stats_a[i];
                sample_b += &stats_b[i];
            }
            let (a, b) = (sample_a.score(), sample_b.score());
            let winner_holds = if a_wins { a > b } else { b > a };
            usize::from(!winner_holds)
        })
        .sum();

    Ok(BootstrapResult {
        score_a,
        score_b,
        p_value: losses as f64 / trials as f64,
        trials,
    })
}

pub fn paired_bootstrap(
    kind: MetricKind,
    sys_a: &[String],
    sys_b: &[String],
    refs: &[String],
    trials: usize,
    seed: u64,
) -> Result<BootstrapResult> {
    if sys_a.len() != sys_b.len() {
        return Err(Error::LengthMismatch {
            what: "bootstrap systems",
            left: sys_a.len(),
            right: sys_b.len(),
        });
    }
    let a = corpus_stats(kind, sys_a, refs, None)?;
    let b = corpus_stats(kind, sys_b, refs, None)?;
    paired_bootstrap_stats(&a, &b, trials, seed)
}
