use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod docdata;
mod factors;
mod io;
mod mbr;
mod metrics;
mod rerank;
mod text;
mod tm;

/// Batch tools for n-best reranking, MBR decoding and MT data preparation.
#[derive(Parser, Debug)]
#[command(name = "mtkit", version, propagate_version = true)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// More diagnostics on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Corpus metrics and significance testing.
    #[command(subcommand)]
    Metrics(metrics::MetricsCmd),
    /// Linear n-best reranking and weight tuning.
    #[command(subcommand)]
    Rerank(rerank::RerankCmd),
    /// Minimum Bayes risk decoding.
    #[command(subcommand)]
    Mbr(mbr::MbrCmd),
    /// End-to-end decoding pipelines.
    #[command(subcommand)]
    Pipeline(mbr::PipelineCmd),
    /// Named-entity source factors.
    #[command(subcommand)]
    Factors(factors::FactorsCmd),
    /// Document-level datasets and hypotheses.
    #[command(subcommand)]
    Docdata(docdata::DocdataCmd),
    /// Parallel corpus filtering.
    #[command(subcommand)]
    Filter(text::FilterCmd),
    /// Rule-based post-editing of translations.
    #[command(subcommand)]
    Postprocess(text::PostprocessCmd),
    /// Translation memory indexing and retrieval.
    #[command(subcommand)]
    Tm(tm::TmCmd),
}

/// Error raised for invalid flag combinations detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Metrics(c) => metrics::run(c, seed),
        Command::Rerank(c) => rerank::run(c, seed),
        Command::Mbr(c) => mbr::run(c),
        Command::Pipeline(c) => mbr::run_pipeline(c),
        Command::Factors(c) => factors::run(c),
        Command::Docdata(c) => docdata::run(c, seed),
        Command::Filter(c) => text::run_filter(c),
        Command::Postprocess(c) => text::run_postprocess(c),
        Command::Tm(c) => tm::run(c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    }

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
