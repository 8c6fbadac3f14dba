use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use mhtlab_cli::{config::parse_formats, exit_code, run, Analysis, Format, RunConfig};

/// Predator-prey model analyses: simulation, equilibria, Hopf loci, fold
/// thresholds, region maps and basins of attraction.
#[derive(Parser)]
#[command(name = "mhtlab", version)]
struct Cli {
    /// Analysis to run.
    #[arg(value_enum)]
    analysis: Analysis,
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid analyses; falls back to MHTLAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated artifact formats; overrides `output.format`.
    #[arg(long)]
    format: Option<String>,
}

fn threads(cli: &Cli) -> Result<Option<usize>> {
    if let Some(n) = cli.threads {
        return Ok(Some(n));
    }
    match std::env::var("MHTLAB_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("MHTLAB_THREADS: `{v}` is not a thread count")),
        Err(_) => Ok(None),
    }
}

fn main_inner(cli: Cli) -> Result<()> {
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("reading config {}", cli.config.display()))?;
    let cfg =
        RunConfig::parse(&text).with_context(|| format!("config {}", cli.config.display()))?;
    if let Some(n) = threads(&cli)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("mhtlab-out"));
    let formats = match &cli.format {
        Some(f) => parse_formats(f).map_err(|e| anyhow::anyhow!("--format `{f}`: {e}"))?,
        None => cfg
            .formats
            .clone()
            .unwrap_or_else(|| vec![Format::Json, Format::Csv, Format::Svg]),
    };
    let artifacts = run(&cfg, cli.analysis, &dir, &formats)?;
    for f in artifacts.files {
        println!("{}", f.display());
    }
    Ok(())
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
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
