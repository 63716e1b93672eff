use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Subcommand;
use mtkit_core::factors::{
    attach_factors, count_categories, propagate_to_subwords, read_factored, read_standoff, write_factored, Gazetteer,
    WORD_MARKER,
};

use crate::io;

#[derive(Subcommand, Debug)]
pub enum FactorsCmd {
    /// Attach entity factors to tokenized sentences.
    Tag {
        /// One whitespace-tokenized sentence per line.
        #[arg(long)]
        tokens: PathBuf,
        /// Standoff spans, `sent_id start end CATEGORY` per line.
        #[arg(long, conflicts_with = "gazetteer", required_unless_present = "gazetteer")]
        standoff: Option<PathBuf>,
        /// `phrase<TAB>CATEGORY` list for exact-match tagging.
        #[arg(long)]
        gazetteer: Option<PathBuf>,
    },
    /// Copy token factors onto a subword segmentation.
    Propagate {
        /// Factored sentences, `surface|pN` tokens.
        #[arg(long)]
        factored: PathBuf,
        /// Subword segmentation of the same sentences.
        #[arg(long)]
        subwords: PathBuf,
        /// Word-initial marker of the segmentation.
        #[arg(long, default_value = WORD_MARKER)]
        marker: String,
    },
    /// Count entities per category in a factored file.
    Count {
        #[arg(long)]
        factored: PathBuf,
    },
}

pub fn run(cmd: FactorsCmd) -> Result<()> {
    let mut out = io::stdout();
    match cmd {
        FactorsCmd::Tag {
            tokens,
            standoff,
            gazetteer,
        } => {
            let sentences = io::lines(&tokens)?;
            let spans = match &standoff {
                Some(p) => Some(io::read_with(p, read_standoff)?),
                None => None,
            };
            let gaz = match &gazetteer {
                Some(p) => Some(io::read_with(p, Gazetteer::read)?),
                None => None,
            };
            for (i, s) in sentences.iter().enumerate() {
                let toks: Vec<&str> = s.split_whitespace().collect();
                let found = match (&spans, &gaz) {
                    (Some(m), _) => m.get(&i).cloned().unwrap_or_default(),
                    (None, Some(g)) => g.tag(&toks),
                    (None, None) => Vec::new(),
                };
                let factored =
                    attach_factors(&toks, &found).with_context(|| format!("{}: sentence {i}", tokens.display()))?;
                writeln!(out, "{}", write_factored(&factored))?;
            }
        }
        FactorsCmd::Propagate {
            factored,
            subwords,
            marker,
        } => {
            let sentences = io::read_with(&factored, read_factored)?;
            let pieces = io::lines(&subwords)?;
            if sentences.len() != pieces.len() {
                anyhow::bail!(
                    "{} has {} lines but {} has {}",
                    factored.display(),
                    sentences.len(),
                    subwords.display(),
                    pieces.len()
                );
            }
            for (i, (f, p)) in sentences.iter().zip(&pieces).enumerate() {
                let p: Vec<&str> = p.split_whitespace().collect();
                let result = propagate_to_subwords(f, &p, &marker)
                    .with_context(|| format!("{}: line {}", subwords.display(), i + 1))?;
                writeln!(out, "{}", write_factored(&result))?;
            }
        }
        FactorsCmd::Count { factored } => {
            let sentences = io::read_with(&factored, read_factored)?;
            let counts = count_categories(sentences.iter().map(Vec::as_slice));
            for (category, n) in counts {
                writeln!(out, "{category}\t{n}")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
