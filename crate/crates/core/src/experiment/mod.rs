//! Experiment configuration, orchestration and output.
//!
//! Every run `r` draws from ChaCha streams seeded with `base_seed + r`, one
//! stream per agent, so results do not depend on scheduling or on which other
//! agents are in the roster. Runs execute in parallel and are reduced in run
//! order.

mod aggregate;
mod bandit;
mod config;
mod converge;
mod exp_gap;
mod gridworld;
mod output;

pub use aggregate::{find_curve, mean_std, AggregateCurve};
pub use bandit::{default_gittins_cache_dir, run_bandit_experiment, BANDIT_METRICS};
pub use config::{
    default_r_learning, BanditAgentSpec, BanditSettings, ConvergeSettings, ExpGapSettings, ExperimentConfig,
    ExperimentKind, GridAgentSpec, GridworldSettings, DEFAULT_P_EXP,
};
pub use converge::{run_convergence_experiment, two_mode_bernoulli, ConvergeReport};
pub use exp_gap::{
    bcr_steps_to_first_reward, chain_mode_set, probe_steps, run_exponential_gap_experiment, ChainEnv, ChainMode,
    ExpGapReport, ExpGapRow,
};
pub use gridworld::{
    load_map, run_gridworld_experiment, GridLearner, GridSummary, GridworldReport, Occupancy,
};
pub use output::{emit_csv, emit_json, emit_svg_plot, read_csv, render_svg};

use std::path::PathBuf;

use rand::SeedableRng;

use crate::SimRng;

/// Generator for stream `stream` of run `run`.
pub fn run_rng(base_seed: u64, run: usize, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(base_seed.wrapping_add(run as u64));
    rng.set_stream(stream);
    rng
}

/// Runs any experiment and writes `curves.csv`, `curves.svg` and
/// `summary.json` into `config.out` (or `out/<kind>`). Returns the output
/// directory.
pub fn run_and_emit(config: &ExperimentConfig) -> crate::Result<PathBuf> {
    config.validate()?;
    let dir = config
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(config.kind_name()));
    let (curves, title) = match &config.kind {
        ExperimentKind::Bandit(_) => {
            let curves = run_bandit_experiment(config)?;
            emit_json(&curves, &dir.join("summary.json"))?;
            (curves, "bandit")
        }
        ExperimentKind::Gridworld(_) => {
            let report = run_gridworld_experiment(config)?;
            emit_json(&report, &dir.join("summary.json"))?;
            (report.curves, "grid-world")
        }
        ExperimentKind::ExpGap(_) => {
            let report = run_exponential_gap_experiment(config)?;
            emit_json(&report, &dir.join("summary.json"))?;
            (report.curves(), "steps to first reward")
        }
        ExperimentKind::Converge(_) => {
            let report = run_convergence_experiment(config)?;
            emit_json(&report, &dir.join("summary.json"))?;
            (report.curves, "convergence")
        }
    };
    emit_csv(&curves, &dir.join("curves.csv"))?;
    emit_svg_plot(&curves, &dir.join("curves.svg"), title)?;
    Ok(dir)
}
