use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mumford_heat::cli::{run_file, Command, Overrides};
use mumford_heat::operator::Mode;

/// Exact spectra, heat flow and Markov paths on p-adic Schottky domains.
#[derive(Parser)]
#[command(name = "mumford-heat", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the configuration, group and fundamental domain.
    Validate,
    /// Eigenvalue classes of admissible wavelets.
    Spectrum,
    /// Solve the Cauchy problem on a time grid.
    Evolve,
    /// Simulate jump paths and compare with the transition matrix.
    Sample,
    /// Exact identity checks and convention comparisons.
    Audit,
    /// Solve (eta I - Q) u = h.
    Resolvent,
}

#[derive(Args)]
struct Flags {
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    level: Option<u32>,
    /// Comma-separated times.
    #[arg(long = "times", visible_alias = "t", value_delimiter = ',', global = true)]
    times: Option<Vec<f64>>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    mode: Option<Mode>,
    #[arg(long, global = true, conflicts_with = "cutoff_tol")]
    cutoff_len: Option<usize>,
    #[arg(long, global = true)]
    cutoff_tol: Option<f64>,
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// Resolvent parameter.
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// Initial state of sampled paths.
    #[arg(long, global = true)]
    start: Option<usize>,
}

fn init_threads() {
    if let Some(n) = std::env::var("MUMFORD_HEAT_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let cmd = match cli.command {
        Sub::Validate => Command::Validate,
        Sub::Spectrum => Command::Spectrum,
        Sub::Evolve => Command::Evolve,
        Sub::Sample => Command::Sample,
        Sub::Audit => Command::Audit,
        Sub::Resolvent => Command::Resolvent,
    };
    let f = cli.flags;
    let Some(config) = f.config else {
        eprintln!("error: --config is required");
        return ExitCode::from(2);
    };
    let ov = Overrides {
        level: f.level,
        times: f.times,
        paths: f.paths,
        seed: f.seed,
        mode: f.mode,
        cutoff_len: f.cutoff_len,
        cutoff_tol: f.cutoff_tol,
        out: f.out,
        eta: f.eta,
        start: f.start,
    };
    match run_file(cmd, &config, &ov) {
        Ok(files) => {
            for p in files {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
