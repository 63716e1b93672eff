use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Subcommand;
use mtkit_core::corpus::read_boundaries;
use mtkit_core::datapipe::{
    build_doc_dataset, build_merged_dataset, map_doc_nbest, synthetic_shuffle, whitespace_tokens, write_doc_samples,
    DocMode,
};
use mtkit_core::nbest::{write_nbest, Origin};

use crate::io::{self, CorpusArgs};

#[derive(Subcommand, Debug)]
pub enum DocdataCmd {
    /// Build a document-level training set as `source<TAB>target` samples.
    Build {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// curr, prev_curr, window_50t, window_100t, window_250t or window_500t.
        #[arg(long, default_value = "curr", conflicts_with = "merged")]
        mode: DocMode,
        /// All six modes concatenated and shuffled.
        #[arg(long)]
        merged: bool,
        /// Shuffle sentence pairs into one synthetic document before building.
        #[arg(long)]
        synthetic_shuffle: bool,
    },
    /// Map document-level n-best lists back to sentence-level lists.
    Split {
        /// Document-level n-best list; segment id c covers chunk c.
        #[arg(long)]
        nbest: PathBuf,
        /// Sentence range of every chunk, `start end` per line.
        #[arg(long)]
        chunks: PathBuf,
        /// Number of sentences (default: end of the last chunk).
        #[arg(long)]
        sentences: Option<usize>,
        /// Where to write the sentence-level n-best list.
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(cmd: DocdataCmd, seed: u64) -> Result<()> {
    let mut out = io::stdout();
    match cmd {
        DocdataCmd::Build {
            corpus,
            mode,
            merged,
            synthetic_shuffle: shuffle,
        } => {
            let mut c = corpus.load()?;
            if shuffle {
                c = synthetic_shuffle(&c, seed);
            }
            let counter = |_: usize, s: &str| whitespace_tokens(s);
            let samples = if merged {
                build_merged_dataset(&c, &counter, seed)
            } else {
                build_doc_dataset(&c, mode, &counter)
            };
            let over = samples.iter().filter(|s| s.over_budget).count();
            if over > 0 {
                log::warn!("{over} single sentences exceed the window budget");
            }
            write_doc_samples(&samples, &mut out)?;
        }
        DocdataCmd::Split {
            nbest,
            chunks,
            sentences,
            out: path,
        } => {
            let lists = io::nbest(&nbest, Origin::Document)?;
            let ranges = io::read_with(&chunks, read_boundaries)?;
            let n = sentences.unwrap_or_else(|| ranges.iter().map(|r| r.end).max().unwrap_or(0));
            let (mapped, report) = map_doc_nbest(&lists, &ranges, n)?;
            let mut w = io::create(&path)?;
            write_nbest(&mapped, &mut w)?;
            w.flush()?;
            write!(out, "{report}")?;
        }
    }
    out.flush()?;
    Ok(())
}
