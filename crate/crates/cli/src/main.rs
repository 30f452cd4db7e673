//! `plasmon`: spectra, polarization tensors, resonance scans, coupled pairs
//! and far fields driven by a TOML config.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use run::RunError;

#[derive(Debug, Parser)]
#[command(name = "plasmon", version, about = "Plasmonic resonances via the Neumann-Poincare spectrum")]
struct Cli {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads: a positive integer or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_threads)]
    threads: Threads,
    /// Suppress the summary on stderr.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy)]
enum Threads {
    Auto,
    Fixed(usize),
}

fn parse_threads(s: &str) -> Result<Threads, String> {
    if s == "auto" {
        return Ok(Threads::Auto);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Threads::Fixed(n)),
        _ => Err(format!("expected a positive integer or `auto`, got `{s}`")),
    }
}

fn run(cli: &Cli) -> Result<run::Summary, RunError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| RunError::Config(format!("{}: {e}", cli.config.display())))?;
    let cfg = config::parse(&text).map_err(|e| RunError::Config(e.0))?;
    let plan = config::validate(&cfg).map_err(|e| RunError::Config(e.0))?;
    let output_dir = cli
        .output
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| RunError::Config("output_dir: not set; pass --output or set it in the config".into()))?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Threads::Fixed(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| RunError::Config(format!("--threads: {e}")))?;
    pool.install(|| run::execute(&cfg, &plan, &output_dir))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            if !cli.quiet {
                for w in &summary.warnings {
                    eprintln!("plasmon: warning: {w}");
                }
                eprintln!(
                    "wrote {} artifact(s) and manifest.json to {}",
                    summary.artifacts.len(),
                    summary.output_dir.display()
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("plasmon: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
