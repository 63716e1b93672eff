use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Subcommand;
use mtkit_core::tm::{extract_adaptation_sets, write_adaptation_sets, TmIndex};

use crate::io::{self, CorpusArgs};

#[derive(Subcommand, Debug)]
pub enum TmCmd {
    /// Index a parallel corpus into a binary translation memory file.
    Index {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the best matches of every input sentence.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// One sentence per line.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0.4)]
        threshold: f64,
    },
    /// Write per-input adaptation sets and print match statistics.
    AdaptSet {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 0.4)]
        threshold: f64,
        /// `input_id<TAB>similarity<TAB>source<TAB>target` lines.
        #[arg(long)]
        out: PathBuf,
    },
}

fn check(k: usize, threshold: f64) -> Result<()> {
    if k == 0 {
        return Err(crate::usage("--k must be at least 1"));
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(crate::usage("--threshold must lie in [0, 1]"));
    }
    Ok(())
}

pub fn run(cmd: TmCmd) -> Result<()> {
    let mut out = io::stdout();
    match cmd {
        TmCmd::Index { corpus, out: path } => {
            let c = corpus.load()?;
            let index = TmIndex::build(&c)?;
            let mut w = io::create(&path)?;
            index.write(&mut w)?;
            w.flush()?;
            writeln!(out, "pairs={}", index.len())?;
            writeln!(out, "vocabulary={}", index.vocab_size())?;
        }
        TmCmd::Query {
            index,
            input,
            k,
            threshold,
        } => {
            check(k, threshold)?;
            let idx = io::read_with(&index, TmIndex::read)?;
            let inputs = io::lines(&input)?;
            let (sets, _) = extract_adaptation_sets(&idx, &inputs, k, threshold)?;
            for set in &sets {
                for m in &set.matches {
                    writeln!(
                        out,
                        "{}\t{}\t{:.6}\t{}\t{}",
                        set.input_id, m.pair_id, m.similarity, m.source, m.target
                    )?;
                }
            }
        }
        TmCmd::AdaptSet {
            index,
            input,
            k,
            threshold,
            out: path,
        } => {
            check(k, threshold)?;
            let idx = io::read_with(&index, TmIndex::read)?;
            let inputs = io::lines(&input)?;
            let (sets, stats) = extract_adaptation_sets(&idx, &inputs, k, threshold)?;
            let mut w = io::create(&path)?;
            write_adaptation_sets(&sets, &mut w)?;
            w.flush()?;
            write!(out, "{stats}")?;
        }
    }
    out.flush()?;
    Ok(())
}
