use std::path::PathBuf;
use std::process::ExitCode;

use bayes_control::bandit::GittinsTable;
use bayes_control::experiment::{default_gittins_cache_dir, run_and_emit, ExperimentConfig, ExperimentKind};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bcr", about = "Run control-rule experiments and write CSV/SVG/JSON results")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ten-lever Bernoulli bandit: control rule vs epsilon-greedy vs Gittins.
    Bandit(RunArgs),
    /// Membrane grid-world: control rule vs R-learning.
    Gridworld(RunArgs),
    /// Build (or load) a cached Gittins index table.
    GittinsBuild(GittinsArgs),
    /// Steps to first reward on k-chains.
    ExpGap(RunArgs),
    /// Convergence of the predictive action law on a two-mode problem.
    Converge(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GittinsArgs {
    #[arg(long, default_value_t = 1300)]
    horizon: usize,
    #[arg(long, default_value_t = 0.999)]
    discount: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    /// Cache directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted for uniformity with the other subcommands.
    #[arg(long, hide = true)]
    seed: Option<u64>,
    #[arg(long, hide = true)]
    runs: Option<usize>,
    #[arg(long, hide = true)]
    steps: Option<usize>,
}

fn configure(args: RunArgs, default: fn() -> ExperimentConfig, kind: &str) -> bayes_control::Result<ExperimentConfig> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => default(),
    };
    if config.kind_name() != kind {
        return Err(bayes_control::Error::InvalidParameter(format!(
            "config describes a {} experiment, not {kind}",
            config.kind_name()
        )));
    }
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(steps) = args.steps {
        config.steps = steps;
        // Keep the default Gittins horizon long enough for longer runs.
        if let ExperimentKind::Bandit(b) = &mut config.kind {
            for agent in &mut b.agents {
                if let bayes_control::experiment::BanditAgentSpec::Gittins { horizon, .. } = agent {
                    *horizon = (*horizon).max(steps + 1);
                }
            }
        }
    }
    if args.out.is_some() {
        config.out = args.out;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> bayes_control::Result<()> {
    let (args, default, kind): (RunArgs, fn() -> ExperimentConfig, &str) = match cli.command {
        Command::GittinsBuild(g) => {
            let dir = g.out.unwrap_or_else(default_gittins_cache_dir);
            let start = std::time::Instant::now();
            let (table, path) = GittinsTable::load_or_compute(&dir, g.horizon, g.discount, g.tolerance)?;
            println!(
                "{} states, index(0,0) = {:.4}, {} ({:.1?})",
                table.len(),
                table.index(0, 0)?,
                path.display(),
                start.elapsed()
            );
            return Ok(());
        }
        Command::Bandit(a) => (a, ExperimentConfig::bandit_default, "bandit"),
        Command::Gridworld(a) => (a, ExperimentConfig::gridworld_default, "gridworld"),
        Command::ExpGap(a) => (a, ExperimentConfig::exp_gap_default, "exp_gap"),
        Command::Converge(a) => (a, ExperimentConfig::converge_default, "converge"),
    };
    let config = configure(args, default, kind)?;
    let start = std::time::Instant::now();
    let dir = run_and_emit(&config)?;
    println!("{} results in {} ({:.1?})", kind, dir.display(), start.elapsed());
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
