//! Command-line entry point for the experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ego_bounds::harness::{self, Command, Config, Format};

#[derive(Parser)]
#[command(
    name = "ego-bounds",
    version,
    about = "Worst-case regret experiments for kernel-based global optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the `seed` config key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Envelopes and adversarial witnesses for LCB and EI in one dimension.
    DemoAdversarial,
    /// Average simple regret on sampled RKHS functions vs adversarial regret.
    RegretCompare,
    /// Decay of the worst-case posterior std on uniform grids.
    RateFit,
    /// Certify the metric-entropy lower bound for several policies.
    LowerBoundCheck,
    /// Exact minimum recovery with the quadratic kernel.
    QuadraticRecovery,
    /// Empirical packing numbers of the RKHS ball.
    EntropyEstimate,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Csv,
    Json,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::DemoAdversarial => Command::DemoAdversarial,
            Cmd::RegretCompare => Command::RegretCompare,
            Cmd::RateFit => Command::RateFit,
            Cmd::LowerBoundCheck => Command::LowerBoundCheck,
            Cmd::QuadraticRecovery => Command::QuadraticRecovery,
            Cmd::EntropyEstimate => Command::EntropyEstimate,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> ego_bounds::Result<()> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.set("seed", seed);
    }
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    if cli.jobs == 0 {
        return Err(ego_bounds::Error::Config("--jobs must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| ego_bounds::Error::Config(e.to_string()))?;
    let command: Command = cli.command.into();
    let manifest = pool.install(|| harness::run_to_dir(command, &config, format, &cli.out))?;
    for f in &manifest.files {
        println!("{}", cli.out.join(&f.name).display());
    }
    println!("{}", cli.out.join(harness::output::MANIFEST_NAME).display());
    Ok(())
}
