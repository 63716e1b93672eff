use std::fs::File;
use std::io::{self, BufReader, BufWriter};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use mtkit_core::corpus::{read_boundaries, read_lines, ParallelCorpus};
use mtkit_core::nbest::{parse_nbest_with_origin, NBestList, Origin, WeightVector};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

/// Runs a core reader on a file, naming the file in any error.
pub fn read_with<T>(path: &Path, f: impl FnOnce(BufReader<File>) -> mtkit_core::Result<T>) -> Result<T> {
    let reader = open(path)?;
    f(reader).with_context(|| path.display().to_string())
}

pub fn lines(path: &Path) -> Result<Vec<String>> {
    read_with(path, read_lines)
}

pub fn nbest(path: &Path, origin: Origin) -> Result<Vec<NBestList>> {
    read_with(path, |r| parse_nbest_with_origin(r, origin))
}

pub fn weights(path: &Path) -> Result<WeightVector> {
    read_with(path, WeightVector::read)
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn stdout() -> BufWriter<io::StdoutLock<'static>> {
    BufWriter::new(io::stdout().lock())
}

/// A parallel corpus given as one TSV file or two aligned files.
#[derive(Args, Debug, Clone)]
pub struct CorpusArgs {
    /// `source<TAB>target` corpus.
    #[arg(long, conflicts_with_all = ["src", "tgt"], required_unless_present_all = ["src", "tgt"])]
    pub corpus: Option<PathBuf>,
    /// Source side, line-aligned with --tgt.
    #[arg(long, requires = "tgt")]
    pub src: Option<PathBuf>,
    /// Target side, line-aligned with --src.
    #[arg(long, requires = "src")]
    pub tgt: Option<PathBuf>,
    /// Document boundaries, one `start end` range per line.
    #[arg(long)]
    pub docs: Option<PathBuf>,
}

impl CorpusArgs {
    pub fn load(&self) -> Result<ParallelCorpus> {
        let corpus = match (&self.corpus, &self.src, &self.tgt) {
            (Some(c), _, _) => read_with(c, ParallelCorpus::read_tsv)?,
            (None, Some(s), Some(t)) => {
                let (src, tgt) = (open(s)?, open(t)?);
                ParallelCorpus::read_aligned(src, tgt).with_context(|| format!("{} / {}", s.display(), t.display()))?
            }
            _ => return Err(crate::usage("give --corpus or both --src and --tgt")),
        };
        match &self.docs {
            Some(d) => {
                let ranges = read_with(d, read_boundaries)?;
                ParallelCorpus::with_documents(corpus.pairs, ranges).with_context(|| d.display().to_string())
            }
            None => Ok(corpus),
        }
    }
}
