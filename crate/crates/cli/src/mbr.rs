use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Subcommand};
use mtkit_core::mbr::{
    mbr_decode, two_stage_decode, utility_matrix, MbrResult, PseudoReferenceSet, Utility, UtilityMatrix,
};
use mtkit_core::nbest::{align_lists, NBestList, Origin};
use rayon::prelude::*;

use crate::io;

#[derive(Args, Debug)]
pub struct UtilityArgs {
    /// chrf or bleu-sentence.
    #[arg(long, default_value = "chrf", conflicts_with = "matrix")]
    utility: String,
    /// Precomputed utility matrices, one per segment in order (`M N` header, then M·N values).
    #[arg(long)]
    matrix: Option<PathBuf>,
}

impl UtilityArgs {
    /// One utility per segment.
    fn load(&self, segments: usize) -> Result<Vec<Utility>> {
        match &self.matrix {
            Some(p) => {
                let ms = io::read_with(p, UtilityMatrix::read_all)?;
                if ms.len() != segments {
                    anyhow::bail!("{}: {} matrices for {} segments", p.display(), ms.len(), segments);
                }
                Ok(ms.into_iter().map(Utility::ExternalMatrix).collect())
            }
            None => {
                let u = Utility::builtin(&self.utility).map_err(|e| crate::usage(e.to_string()))?;
                Ok(vec![u; segments])
            }
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum MbrCmd {
    /// Pick the candidate with the highest expected utility for every segment.
    Decode {
        /// Candidate n-best list.
        #[arg(long)]
        nbest: PathBuf,
        /// Pseudo-reference samples as an n-best list (default: the candidates).
        #[arg(long)]
        samples: Option<PathBuf>,
        #[command(flatten)]
        utility: UtilityArgs,
        /// Write per-candidate expected utilities as TSV.
        #[arg(long)]
        dump_utilities: Option<PathBuf>,
    },
    /// Print the utility matrix of every segment.
    Matrix {
        #[arg(long)]
        nbest: PathBuf,
        #[arg(long)]
        samples: Option<PathBuf>,
        /// chrf or bleu-sentence.
        #[arg(long, default_value = "chrf")]
        utility: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum PipelineCmd {
    /// Merge ensemble and document n-best lists, prune with a reranker, then MBR.
    Qad {
        #[arg(long)]
        ensemble: PathBuf,
        /// Sentence-level n-best list from the document-level model.
        #[arg(long)]
        doc: PathBuf,
        /// Reranker weights used for pruning.
        #[arg(long)]
        weights: PathBuf,
        #[arg(long, default_value_t = 50)]
        k: usize,
        /// chrf or bleu-sentence.
        #[arg(long, default_value = "chrf")]
        utility: String,
        /// Keep duplicate texts from the two lists as separate candidates.
        #[arg(long)]
        keep_duplicates: bool,
        #[arg(long)]
        dump_utilities: Option<PathBuf>,
    },
}

fn candidates_and_samples(nbest: &Path, samples: Option<&Path>) -> Result<Vec<(NBestList, PseudoReferenceSet)>> {
    let lists = io::nbest(nbest, Origin::Other)?;
    match samples {
        None => lists
            .into_iter()
            .map(|l| {
                let p = PseudoReferenceSet::from_candidates(&l)?;
                Ok((l, p))
            })
            .collect::<mtkit_core::Result<_>>()
            .with_context(|| nbest.display().to_string()),
        Some(s) => {
            let sample_lists = io::nbest(s, Origin::Other)?;
            align_lists(lists, sample_lists)
                .into_iter()
                .map(|(l, s)| {
                    let texts = s.hypotheses.into_iter().map(|h| h.text).collect();
                    let p = PseudoReferenceSet::new(l.segment_id, texts)?;
                    Ok((l, p))
                })
                .collect::<mtkit_core::Result<_>>()
                .with_context(|| s.display().to_string())
        }
    }
}

fn dump(path: &Path, results: &[(usize, &NBestList, &MbrResult)]) -> Result<()> {
    let mut w = io::create(path)?;
    writeln!(w, "segment\tcandidate\texpected_utility\tselected\ttext")?;
    for (segment, list, r) in results {
        for (i, (h, eu)) in list.hypotheses.iter().zip(&r.expected_utilities).enumerate() {
            writeln!(
                w,
                "{segment}\t{i}\t{eu:.6}\t{}\t{}",
                u8::from(i == r.best_index),
                h.text
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run(cmd: MbrCmd) -> Result<()> {
    let mut out = io::stdout();
    match cmd {
        MbrCmd::Decode {
            nbest,
            samples,
            utility,
            dump_utilities,
        } => {
            let pairs = candidates_and_samples(&nbest, samples.as_deref())?;
            let utilities = utility.load(pairs.len())?;
            let results = pairs
                .par_iter()
                .zip(&utilities)
                .map(|((l, p), u)| mbr_decode(l, p, u).with_context(|| format!("segment {}", l.segment_id)))
                .collect::<Result<Vec<_>>>()?;
            for r in &results {
                writeln!(out, "{}", r.best.text)?;
            }
            if let Some(path) = dump_utilities {
                let rows: Vec<_> = pairs
                    .iter()
                    .zip(&results)
                    .map(|((l, _), r)| (l.segment_id, l, r))
                    .collect();
                dump(&path, &rows)?;
            }
        }
        MbrCmd::Matrix {
            nbest,
            samples,
            utility,
        } => {
            let u = Utility::builtin(&utility).map_err(|e| crate::usage(e.to_string()))?;
            let pairs = candidates_and_samples(&nbest, samples.as_deref())?;
            let matrices = pairs
                .par_iter()
                .map(|(l, p)| {
                    let texts: Vec<String> = l.hypotheses.iter().map(|h| h.text.clone()).collect();
                    utility_matrix(&texts, &p.samples, &u).with_context(|| format!("segment {}", l.segment_id))
                })
                .collect::<Result<Vec<_>>>()?;
            for m in &matrices {
                out.write_all(m.to_text().as_bytes())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

pub fn run_pipeline(cmd: PipelineCmd) -> Result<()> {
    let PipelineCmd::Qad {
        ensemble,
        doc,
        weights,
        k,
        utility,
        keep_duplicates,
        dump_utilities,
    } = cmd;
    if k == 0 {
        return Err(crate::usage("--k must be at least 1"));
    }
    let u = Utility::builtin(&utility).map_err(|e| crate::usage(e.to_string()))?;
    let ens = io::nbest(&ensemble, Origin::Ensemble)?;
    let docs = io::nbest(&doc, Origin::Document)?;
    let w = io::weights(&weights)?;
    let segments = align_lists(ens, docs);
    let results = segments
        .par_iter()
        .map(|(e, d)| {
            two_stage_decode(e, d, &w, k, &u, !keep_duplicates).with_context(|| format!("segment {}", e.segment_id))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = io::stdout();
    for r in &results {
        writeln!(out, "{}", r.mbr.best.text)?;
    }
    out.flush()?;
    if let Some(path) = dump_utilities {
        let rows: Vec<_> = results
            .iter()
            .map(|r| (r.candidates.segment_id, &r.candidates, &r.mbr))
            .collect();
        dump(&path, &rows)?;
    }
    Ok(())
}
