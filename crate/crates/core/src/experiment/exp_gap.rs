//! A problem where the control rule needs exponentially many steps.
//!
//! In a `k`-chain only `k` consecutive plays of the right action pay off;
//! the wrong action sends the chain back to the start. Two environments
//! differ in which action is right. The observation is just the reward bit,
//! so as long as no reward arrives both modes explain the data equally well
//! and the control rule keeps flipping a fair coin between them.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::aggregate::AggregateCurve;
use super::config::{ExperimentConfig, ExperimentKind};
use super::run_rng;
use crate::engine::{BcrAgent, ModeSet};
use crate::interaction::{Action, Agent, Environment, InteractionHistory, Observation, OperationMode};
use crate::util::one_hot;
use crate::{Error, Result};

/// Length of the run of `advance` actions ending the history, plus `next`,
/// counted since the last payoff.
fn chain_pays(k: usize, advance: Action, history: &InteractionHistory, next: Action) -> bool {
    if next != advance {
        return false;
    }
    let run = 1 + history
        .steps()
        .iter()
        .rev()
        .take_while(|(a, _)| *a == advance)
        .count();
    run % k == 0
}

/// Chain environment: reward 1 after every `k` consecutive `advance` actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainEnv {
    pub k: usize,
    pub advance: Action,
}

impl Environment for ChainEnv {
    fn respond<R: Rng + ?Sized>(
        &self,
        history: &InteractionHistory,
        action: Action,
        _rng: &mut R,
    ) -> Result<(Observation, f64)> {
        let paid = chain_pays(self.k, self.advance, history, action);
        Ok((Observation(usize::from(paid)), f64::from(u8::from(paid))))
    }
}

/// Mode believing the chain advances on `advance` and always playing it.
#[derive(Debug, Clone)]
pub struct ChainMode {
    pub env: ChainEnv,
    label: String,
}

impl ChainMode {
    pub fn new(k: usize, advance: Action) -> Self {
        Self {
            env: ChainEnv { k, advance },
            label: format!("always_{}", advance.0),
        }
    }
}

impl OperationMode for ChainMode {
    fn label(&self) -> &str {
        &self.label
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn n_observations(&self) -> usize {
        2
    }

    fn policy(&self, _history: &InteractionHistory) -> Vec<f64> {
        one_hot(2, self.env.advance.0)
    }

    fn hypothesis(&self, history: &InteractionHistory, action: Action) -> Vec<f64> {
        one_hot(2, usize::from(chain_pays(self.env.k, self.env.advance, history, action)))
    }
}

/// The two chain modes under a uniform prior.
pub fn chain_mode_set(k: usize) -> Result<ModeSet> {
    ModeSet::uniform(vec![
        Box::new(ChainMode::new(k, Action(0))),
        Box::new(ChainMode::new(k, Action(1))),
    ])
}

/// Steps until the control rule first earns a reward, or `None` if `cap`
/// steps pass without one.
pub fn bcr_steps_to_first_reward<R: Rng + ?Sized>(
    modes: Arc<ModeSet>,
    env: &ChainEnv,
    cap: usize,
    rng: &mut R,
) -> Result<Option<usize>> {
    let mut agent = BcrAgent::new(modes);
    let mut history = InteractionHistory::new();
    for t in 1..=cap {
        let action = agent.act(&history, rng)?;
        let (obs, reward) = env.respond(&history, action, rng)?;
        if reward > 0.0 {
            return Ok(Some(t));
        }
        agent.observe(&history, action, obs)?;
        history.push_step(action, obs)?;
    }
    Ok(None)
}

/// The probing strategy: `k` plays of action 0, then `k` of action 1.
/// Returns the step of the first reward.
pub fn probe_steps(env: &ChainEnv) -> Result<usize> {
    let mut history = InteractionHistory::new();
    let mut rng = crate::seeded_rng(0);
    for t in 1..=2 * env.k {
        let action = Action(usize::from(t > env.k));
        let (obs, reward) = env.respond(&history, action, &mut rng)?;
        if reward > 0.0 {
            return Ok(t);
        }
        history.push_step(action, obs)?;
    }
    Err(Error::InvalidParameter(format!("probe found no reward in a {}-chain", env.k)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpGapRow {
    pub k: usize,
    pub runs: usize,
    /// Median over runs; capped runs count as `cap`.
    pub median: f64,
    pub mean: f64,
    pub stderr: f64,
    pub capped: usize,
    pub probe_worst: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpGapReport {
    pub cap: usize,
    pub rows: Vec<ExpGapRow>,
}

impl ExpGapReport {
    pub fn row(&self, k: usize) -> Option<&ExpGapRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    /// Curves indexed by `k`: BCR median and mean, and the probe's worst case.
    pub fn curves(&self) -> Vec<AggregateCurve> {
        let t: Vec<usize> = self.rows.iter().map(|r| r.k).collect();
        let n = self.rows.len();
        vec![
            AggregateCurve {
                agent: "bcr".into(),
                metric: "median_steps".into(),
                t: t.clone(),
                mean: self.rows.iter().map(|r| r.median).collect(),
                stderr: vec![0.0; n],
            },
            AggregateCurve {
                agent: "bcr".into(),
                metric: "mean_steps".into(),
                t: t.clone(),
                mean: self.rows.iter().map(|r| r.mean).collect(),
                stderr: self.rows.iter().map(|r| r.stderr).collect(),
            },
            AggregateCurve {
                agent: "probe".into(),
                metric: "median_steps".into(),
                t,
                mean: self.rows.iter().map(|r| r.probe_worst as f64).collect(),
                stderr: vec![0.0; n],
            },
        ]
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Steps to first reward for each `k`. Run `r` is played in the environment
/// where action `r mod 2` advances, and `steps` caps each run.
pub fn run_exponential_gap_experiment(config: &ExperimentConfig) -> Result<ExpGapReport> {
    config.validate()?;
    let ExperimentKind::ExpGap(settings) = &config.kind else {
        return Err(Error::InvalidParameter("not an exp_gap config".into()));
    };
    let cap = config.steps;
    let mut rows = Vec::new();
    for &k in &settings.ks {
        let modes = Arc::new(chain_mode_set(k)?);
        let hits = (0..config.runs)
            .into_par_iter()
            .map(|run| {
                let env = ChainEnv { k, advance: Action(run % 2) };
                let mut rng = run_rng(config.base_seed, run, k as u64);
                bcr_steps_to_first_reward(Arc::clone(&modes), &env, cap, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let steps: Vec<f64> = hits.iter().map(|h| h.unwrap_or(cap) as f64).collect();
        let (mean, std) = super::aggregate::mean_std(&steps);
        let probe_worst = [Action(0), Action(1)]
            .iter()
            .map(|&advance| probe_steps(&ChainEnv { k, advance }))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .max()
            .unwrap_or(0);
        rows.push(ExpGapRow {
            k,
            runs: config.runs,
            median: median(steps),
            mean,
            stderr: std / (config.runs as f64).sqrt(),
            capped: hits.iter().filter(|h| h.is_none()).count(),
            probe_worst,
        });
    }
    Ok(ExpGapReport { cap, rows })
}
