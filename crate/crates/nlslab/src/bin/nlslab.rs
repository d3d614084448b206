use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlslab::probes::config::Config;
use nlslab::probes::report::resolve_output_dir;
use nlslab::probes::runners;

#[derive(Parser)]
#[command(name = "nlslab", version, about = "Modified-energy experiments for mass-critical NLS on tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Config file (`key = value` lines or a JSON object).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run directory; `NLSLAB_OUT` takes precedence.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for the parallel sums (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override one config key, `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Evolve one initial datum and write the conservation monitor.
    Simulate,
    /// Energy-identity terms and residual along a trajectory.
    EnergyTrack,
    /// Empirical bilinear and L⁶ Strichartz constants.
    Strichartz,
    /// Classify every tuple of a box and tabulate the classes.
    Census,
    /// Sup ratios of the multiplier bounds over (N, G).
    Verify,
    /// Scaling exponents and thresholds of the global iteration.
    Budget,
    /// Increments of both I-energies over a grid of thresholds.
    Conservation,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::EnergyTrack => "energy-track",
            Command::Strichartz => "strichartz",
            Command::Census => "census",
            Command::Verify => "verify",
            Command::Budget => "budget",
            Command::Conservation => "conservation",
        }
    }
}

fn execute(cli: &Cli) -> nlslab::Result<i32> {
    let command = cli.command.name();
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::new(),
    };
    for o in &cli.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| nlslab::Error::Config(format!("--set {o:?} is not key=value")))?;
        cfg.set(k.trim(), v.trim());
    }
    if let Some(seed) = cli.seed {
        cfg.set("seed", seed);
    }
    if let Some(threads) = cli.threads {
        cfg.set("threads", threads);
    }
    let threads: Option<usize> = cfg.get_opt("threads")?;
    if let Some(n) = threads.filter(|&n| n > 0) {
        // fails only if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let configured: Option<String> = cfg.get_opt("output_dir")?;
    let report = runners::run(command, &cfg)?;
    let dir = resolve_output_dir(cli.out.as_deref(), configured, command);
    report.write(&dir)?;
    for line in report.summary.iter().chain(&report.flags) {
        println!("{line}");
    }
    println!("wrote {}", dir.display());
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
