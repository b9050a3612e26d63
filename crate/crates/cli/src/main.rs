use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sysrel_cli::analyses::{self, Overrides};

/// Bayesian system-reliability analyses over columnar datasets.
#[derive(Parser)]
#[command(name = "sysrel", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Analysis configuration file (flat `key = value` format).
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory for result tables.
    #[arg(short, long)]
    out: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the criterion replication count (allocate only).
    #[arg(long)]
    replications: Option<usize>,
    /// Report each output file as it is written.
    #[arg(short, long)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Degradation-plus-failure-time component analysis.
    Degfail(CommonArgs),
    /// Surrogate quality-assurance (pass/fail plus spec measurements).
    Surrogate(CommonArgs),
    /// Lot-to-lot feature prevalence from convenience and random samples.
    Lots(CommonArgs),
    /// Three-component series system with multilevel data.
    #[command(name = "multilevel-series")]
    MultilevelSeries(CommonArgs),
    /// Partially informative system tests plus component counts.
    #[command(name = "partial-tests")]
    PartialTests(CommonArgs),
    /// Hierarchical power-law event-count model for a fleet.
    Nhpp(CommonArgs),
    /// Hierarchical Weibull series system from lifetime data.
    #[command(name = "weibull-series")]
    WeibullSeries(CommonArgs),
    /// System reliability from a Bayesian network with fixed curves.
    #[command(name = "bn-system")]
    BnSystem(CommonArgs),
    /// Flowgraph passage-time moments and saddlepoint density.
    Flowgraph(CommonArgs),
    /// Pre-posterior test-resource allocation search.
    Allocate(CommonArgs),
}

impl Command {
    fn split(&self) -> (&'static str, &CommonArgs) {
        match self {
            Command::Degfail(a) => ("degfail", a),
            Command::Surrogate(a) => ("surrogate", a),
            Command::Lots(a) => ("lots", a),
            Command::MultilevelSeries(a) => ("multilevel-series", a),
            Command::PartialTests(a) => ("partial-tests", a),
            Command::Nhpp(a) => ("nhpp", a),
            Command::WeibullSeries(a) => ("weibull-series", a),
            Command::BnSystem(a) => ("bn-system", a),
            Command::Flowgraph(a) => ("flowgraph", a),
            Command::Allocate(a) => ("allocate", a),
        }
    }
}

fn main() -> ExitCode {
    // SYSREL_THREADS caps the worker pool used by parallel stages
    if let Ok(n) = std::env::var("SYSREL_THREADS") {
        if let Ok(n) = n.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let (kind, args) = cli.command.split();
    let ov = Overrides {
        seed: args.seed,
        replications: args.replications,
        verbose: args.verbose,
    };
    match analyses::run(kind, &args.config, &args.out, ov) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sysrel {kind}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
