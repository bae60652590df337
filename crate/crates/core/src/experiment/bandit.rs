use std::path::PathBuf;
use std::sync::Arc;

use rayon::prelude::*;

use super::aggregate::AggregateCurve;
use super::config::{BanditAgentSpec, ExperimentConfig, ExperimentKind};
use super::run_rng;
use crate::bandit::{bandit_step, bandit_update, BanditEnv, BanditPolicy, BanditStats, GittinsTable};
use crate::{Error, Result};

/// Curves produced per agent: running average reward and the percentage of
/// runs pulling the best lever at each step.
pub const BANDIT_METRICS: [&str; 2] = ["avg_reward", "pct_best"];

fn build_policy(spec: &BanditAgentSpec, steps: usize) -> Result<BanditPolicy> {
    Ok(match spec {
        BanditAgentSpec::Bcr { prior } => BanditPolicy::Thompson(*prior),
        BanditAgentSpec::EpsilonGreedy { epsilon, decay } => BanditPolicy::EpsilonGreedy {
            epsilon: *epsilon,
            decay: *decay,
        },
        BanditAgentSpec::Gittins {
            horizon,
            discount,
            tolerance,
            cache_dir,
        } => {
            if *horizon < steps + 1 {
                return Err(Error::InvalidParameter(format!(
                    "Gittins horizon {horizon} must be at least steps + 1 = {}",
                    steps + 1
                )));
            }
            let dir = cache_dir.clone().unwrap_or_else(default_gittins_cache_dir);
            let (table, _) = GittinsTable::load_or_compute(&dir, *horizon, *discount, *tolerance)?;
            BanditPolicy::Gittins(Arc::new(table))
        }
    })
}

/// Where Gittins tables are cached when a config names no directory.
pub fn default_gittins_cache_dir() -> PathBuf {
    std::env::temp_dir().join("bayes-control-gittins")
}

/// Runs every agent on the same random bandit per run. Biases come from
/// stream 0 and agent `j` acts with stream `j + 1`.
pub fn run_bandit_experiment(config: &ExperimentConfig) -> Result<Vec<AggregateCurve>> {
    config.validate()?;
    let ExperimentKind::Bandit(settings) = &config.kind else {
        return Err(Error::InvalidParameter("not a bandit config".into()));
    };
    let steps = config.steps;
    let policies = settings
        .agents
        .iter()
        .map(|s| build_policy(s, steps))
        .collect::<Result<Vec<_>>>()?;

    // runs × agents × (avg_reward, pct_best)
    let per_run: Vec<Vec<(Vec<f64>, Vec<f64>)>> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let env = BanditEnv::uniform_random(settings.levers, &mut run_rng(config.base_seed, run, 0))?;
            let best = env.best_lever();
            policies
                .iter()
                .enumerate()
                .map(|(j, policy)| {
                    let mut rng = run_rng(config.base_seed, run, j as u64 + 1);
                    let mut stats = BanditStats::new(settings.levers);
                    let mut avg = Vec::with_capacity(steps);
                    let mut hit = Vec::with_capacity(steps);
                    let mut total = 0.0;
                    for t in 1..=steps {
                        let lever = policy.act(&stats, t, &mut rng)?;
                        let reward = bandit_step(&env, lever, &mut rng)?;
                        stats = bandit_update(&stats, lever, reward);
                        total += f64::from(reward);
                        avg.push(total / t as f64);
                        hit.push(if lever == best { 100.0 } else { 0.0 });
                    }
                    Ok((avg, hit))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let t: Vec<usize> = (1..=steps).collect();
    let mut curves = Vec::new();
    for (j, policy) in policies.iter().enumerate() {
        let avg: Vec<Vec<f64>> = per_run.iter().map(|r| r[j].0.clone()).collect();
        let hit: Vec<Vec<f64>> = per_run.iter().map(|r| r[j].1.clone()).collect();
        curves.push(AggregateCurve::from_runs(policy.name(), BANDIT_METRICS[0], t.clone(), &avg)?);
        curves.push(AggregateCurve::from_runs(policy.name(), BANDIT_METRICS[1], t.clone(), &hit)?);
    }
    Ok(curves)
}
