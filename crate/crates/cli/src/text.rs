use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::Subcommand;
use mtkit_core::datapipe::{filter_corpus, FilterConfig};
use mtkit_core::postprocess::{apply_rules, parse_alignment, rule_trace, Language, PostprocessConfig};
use rayon::prelude::*;

use crate::io::{self, CorpusArgs};

#[derive(Subcommand, Debug)]
pub enum FilterCmd {
    /// Clean and filter a parallel corpus; prints removal counts.
    Run {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Where to write the kept pairs as TSV.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_len: usize,
        #[arg(long, default_value_t = 250)]
        max_len: usize,
        #[arg(long, default_value_t = 3.0)]
        max_ratio: f64,
        /// Keep exact duplicate pairs.
        #[arg(long)]
        keep_duplicates: bool,
        /// Leave punctuation as is.
        #[arg(long)]
        no_normalize: bool,
        /// Leave nonprinting characters in place (only without punctuation normalization).
        #[arg(long)]
        keep_nonprinting: bool,
        /// Inputs are already language-identified; no language filtering is done here.
        #[arg(long)]
        prefiltered: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum PostprocessCmd {
    /// Apply the post-editing rules to every hypothesis line.
    Run {
        #[arg(long)]
        src: PathBuf,
        #[arg(long)]
        hyp: PathBuf,
        /// Target language: cs or uk.
        #[arg(long)]
        lang: Language,
        /// Source-target token alignment per line, `i-j` pairs.
        #[arg(long)]
        align: Option<PathBuf>,
        /// Comma-separated subset of rules, e.g. `r1,r5`.
        #[arg(long)]
        rules: Option<String>,
        /// Print every rule's effect as `line<TAB>rule<TAB>before<TAB>after` instead.
        #[arg(long)]
        trace: bool,
    },
}

pub fn run_filter(cmd: FilterCmd) -> Result<()> {
    let FilterCmd::Run {
        corpus,
        out,
        min_len,
        max_len,
        max_ratio,
        keep_duplicates,
        no_normalize,
        keep_nonprinting,
        prefiltered,
    } = cmd;
    let cfg = FilterConfig {
        min_len,
        max_len,
        max_ratio,
        dedupe: !keep_duplicates,
        normalize_punct: !no_normalize,
        strip_nonprinting: !keep_nonprinting,
    };
    cfg.validate().map_err(|e| crate::usage(e.to_string()))?;
    if !prefiltered {
        log::info!("no language identification is applied; pass --prefiltered to silence this");
    }
    let c = corpus.load()?;
    let (kept, report) = filter_corpus(&c, &cfg)?;
    let mut w = io::create(&out)?;
    kept.write_tsv(&mut w)?;
    w.flush()?;
    let mut stdout = io::stdout();
    write!(stdout, "{report}")?;
    stdout.flush()?;
    Ok(())
}

pub fn run_postprocess(cmd: PostprocessCmd) -> Result<()> {
    let PostprocessCmd::Run {
        src,
        hyp,
        lang,
        align,
        rules,
        trace,
    } = cmd;
    let cfg = match &rules {
        Some(r) => PostprocessConfig::with_rules(lang, r).map_err(|e| crate::usage(format!("--rules: {e}")))?,
        None => PostprocessConfig::new(lang),
    };
    let sources = io::lines(&src)?;
    let hyps = io::lines(&hyp)?;
    if sources.len() != hyps.len() {
        anyhow::bail!(
            "{} has {} lines but {} has {}",
            src.display(),
            sources.len(),
            hyp.display(),
            hyps.len()
        );
    }
    let alignments = match &align {
        Some(p) => {
            let lines = io::lines(p)?;
            if lines.len() != hyps.len() {
                anyhow::bail!("{} has {} lines, expected {}", p.display(), lines.len(), hyps.len());
            }
            let parsed = lines
                .iter()
                .enumerate()
                .map(|(i, l)| parse_alignment(l).map_err(|e| anyhow::anyhow!("{}: line {}: {e}", p.display(), i + 1)))
                .collect::<Result<Vec<_>>>()?;
            Some(parsed)
        }
        None => None,
    };
    let alignment = |i: usize| alignments.as_ref().map(|a| a[i].as_slice());

    let mut out = io::stdout();
    if trace {
        let traces: Vec<_> = (0..hyps.len())
            .into_par_iter()
            .map(|i| rule_trace(&sources[i], &hyps[i], &cfg, alignment(i)))
            .collect();
        for (i, t) in traces.iter().enumerate() {
            for e in t {
                writeln!(out, "{}\t{}\t{}\t{}", i + 1, e.rule.id(), e.before, e.after)?;
            }
        }
    } else {
        let fixed: Vec<String> = (0..hyps.len())
            .into_par_iter()
            .map(|i| apply_rules(&sources[i], &hyps[i], &cfg, alignment(i)))
            .collect();
        for line in fixed {
            writeln!(out, "{line}")?;
        }
    }
    out.flush()?;
    Ok(())
}
