//! Bernoulli multi-armed bandits.
//!
//! An operation mode here is a bias vector `m ∈ [0,1]^N` whose policy pulls
//! the lever with the largest bias. Under a uniform prior the posterior over
//! `m` is a product of `Beta(r_j + 1, f_j + 1)` laws, so the control rule
//! reduces to drawing one bias per lever and pulling the argmax.

mod gittins;

pub use gittins::{compute_gittins_table, GittinsTable};

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::interaction::{Action, Agent, Environment, InteractionHistory, Observation};
use crate::util::argmax_random_tie;
use crate::{Error, Result};

/// A bandit with one Bernoulli bias per lever.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnv {
    biases: Vec<f64>,
}

impl BanditEnv {
    pub fn new(biases: Vec<f64>) -> Result<Self> {
        if biases.is_empty() {
            return Err(Error::InvalidParameter("a bandit needs at least one lever".into()));
        }
        if let Some(b) = biases.iter().find(|b| !(0.0..=1.0).contains(*b)) {
            return Err(Error::InvalidParameter(format!("bias {b} outside [0, 1]")));
        }
        Ok(Self { biases })
    }

    /// Biases drawn independently and uniformly from `[0, 1]`.
    pub fn uniform_random<R: Rng + ?Sized>(levers: usize, rng: &mut R) -> Result<Self> {
        Self::new((0..levers).map(|_| rng.random::<f64>()).collect())
    }

    pub fn levers(&self) -> usize {
        self.biases.len()
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// Lever with the highest bias (lowest index on ties).
    pub fn best_lever(&self) -> usize {
        let mut best = 0;
        for (i, b) in self.biases.iter().enumerate() {
            if *b > self.biases[best] {
                best = i;
            }
        }
        best
    }
}

/// Pulls `lever`: reward 1 with probability `bias[lever]`, else 0.
pub fn bandit_step<R: Rng + ?Sized>(env: &BanditEnv, lever: usize, rng: &mut R) -> Result<u8> {
    let bias = *env.biases.get(lever).ok_or(Error::LeverIndex {
        lever,
        levers: env.levers(),
    })?;
    Ok(u8::from(rng.random::<f64>() < bias))
}

impl Environment for BanditEnv {
    fn respond<R: Rng + ?Sized>(
        &self,
        _history: &InteractionHistory,
        action: Action,
        rng: &mut R,
    ) -> Result<(Observation, f64)> {
        let r = bandit_step(self, action.0, rng)?;
        Ok((Observation(r as usize), f64::from(r)))
    }
}

/// Per-lever success and failure counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BanditStats {
    pub successes: Vec<u64>,
    pub failures: Vec<u64>,
}

impl BanditStats {
    pub fn new(levers: usize) -> Self {
        Self {
            successes: vec![0; levers],
            failures: vec![0; levers],
        }
    }

    pub fn levers(&self) -> usize {
        self.successes.len()
    }

    pub fn pulls(&self, lever: usize) -> u64 {
        self.successes[lever] + self.failures[lever]
    }

    /// Posterior mean `(r + 1) / (r + f + 2)` under the uniform prior.
    pub fn posterior_mean(&self, lever: usize) -> f64 {
        (self.successes[lever] as f64 + 1.0) / (self.pulls(lever) as f64 + 2.0)
    }
}

/// Records one pull of `lever`.
pub fn bandit_update(stats: &BanditStats, lever: usize, reward: u8) -> BanditStats {
    let mut next = stats.clone();
    if reward > 0 {
        next.successes[lever] += 1;
    } else {
        next.failures[lever] += 1;
    }
    next
}

/// Beta prior over each lever's bias. The default is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for BetaPrior {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }
}

/// Control-rule lever choice: one posterior draw per lever, pull the argmax.
pub fn thompson_act<R: Rng + ?Sized>(stats: &BanditStats, rng: &mut R) -> usize {
    thompson_act_with_prior(stats, BetaPrior::default(), rng)
}

pub fn thompson_act_with_prior<R: Rng + ?Sized>(
    stats: &BanditStats,
    prior: BetaPrior,
    rng: &mut R,
) -> usize {
    let draws: Vec<f64> = (0..stats.levers())
        .map(|j| {
            let a = stats.successes[j] as f64 + prior.alpha;
            let b = stats.failures[j] as f64 + prior.beta;
            Beta::new(a, b).expect("positive Beta parameters").sample(rng)
        })
        .collect();
    argmax_random_tie(&draws, rng)
}

/// Decaying epsilon-greedy: explores uniformly with probability
/// `epsilon * decay^t`, otherwise pulls the lever with the highest posterior
/// mean.
pub fn epsilon_greedy_act<R: Rng + ?Sized>(
    stats: &BanditStats,
    t: usize,
    epsilon: f64,
    decay: f64,
    rng: &mut R,
) -> usize {
    let explore = epsilon * decay.powf(t as f64);
    if rng.random::<f64>() < explore {
        rng.random_range(0..stats.levers())
    } else {
        let means: Vec<f64> = (0..stats.levers()).map(|j| stats.posterior_mean(j)).collect();
        argmax_random_tie(&means, rng)
    }
}

/// Pulls the lever with the highest Gittins index.
pub fn gittins_act<R: Rng + ?Sized>(
    stats: &BanditStats,
    table: &GittinsTable,
    rng: &mut R,
) -> Result<usize> {
    let indices = (0..stats.levers())
        .map(|j| table.index(stats.successes[j], stats.failures[j]))
        .collect::<Result<Vec<_>>>()?;
    Ok(argmax_random_tie(&indices, rng))
}

/// The bandit agents compared in the experiments.
#[derive(Debug, Clone)]
pub enum BanditPolicy {
    Thompson(BetaPrior),
    EpsilonGreedy { epsilon: f64, decay: f64 },
    Gittins(Arc<GittinsTable>),
}

impl BanditPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            BanditPolicy::Thompson(_) => "bcr",
            BanditPolicy::EpsilonGreedy { .. } => "epsilon_greedy",
            BanditPolicy::Gittins(_) => "gittins",
        }
    }

    /// Chooses a lever at step `t` (1-based).
    pub fn act<R: Rng + ?Sized>(&self, stats: &BanditStats, t: usize, rng: &mut R) -> Result<usize> {
        match self {
            BanditPolicy::Thompson(prior) => Ok(thompson_act_with_prior(stats, *prior, rng)),
            BanditPolicy::EpsilonGreedy { epsilon, decay } => {
                Ok(epsilon_greedy_act(stats, t, *epsilon, *decay, rng))
            }
            BanditPolicy::Gittins(table) => gittins_act(stats, table, rng),
        }
    }
}

/// Wraps a [`BanditPolicy`] as an [`Agent`] over reward-bit observations.
pub struct BanditAgent {
    policy: BanditPolicy,
    stats: BanditStats,
}

impl BanditAgent {
    pub fn new(policy: BanditPolicy, levers: usize) -> Self {
        Self {
            policy,
            stats: BanditStats::new(levers),
        }
    }

    pub fn stats(&self) -> &BanditStats {
        &self.stats
    }
}

impl Agent for BanditAgent {
    fn act<R: Rng + ?Sized>(&mut self, history: &InteractionHistory, rng: &mut R) -> Result<Action> {
        self.policy.act(&self.stats, history.len() + 1, rng).map(Action)
    }

    fn observe(&mut self, _history: &InteractionHistory, action: Action, observation: Observation) -> Result<()> {
        self.stats = bandit_update(&self.stats, action.0, observation.0 as u8);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    #[test]
    fn extreme_biases_are_deterministic() {
        let env = BanditEnv::new(vec![1.0, 0.0]).unwrap();
        let mut rng = seeded_rng(0);
        for _ in 0..1000 {
            assert_eq!(bandit_step(&env, 0, &mut rng).unwrap(), 1);
            assert_eq!(bandit_step(&env, 1, &mut rng).unwrap(), 0);
        }
        assert!(bandit_step(&env, 2, &mut rng).is_err());
    }

    #[test]
    fn bias_frequency() {
        let env = BanditEnv::new(vec![0.3]).unwrap();
        let mut rng = seeded_rng(1);
        let n = 100_000;
        let hits: u32 = (0..n).map(|_| u32::from(bandit_step(&env, 0, &mut rng).unwrap())).sum();
        assert!((f64::from(hits) / f64::from(n) - 0.3).abs() < 0.01);
    }

    #[test]
    fn invalid_biases_rejected() {
        assert!(BanditEnv::new(vec![]).is_err());
        assert!(BanditEnv::new(vec![1.2]).is_err());
        assert!(BanditEnv::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn update_examples() {
        let s = BanditStats::new(2);
        let win = bandit_update(&s, 0, 1);
        assert_eq!((win.successes[0], win.failures[0]), (1, 0));
        let loss = bandit_update(&s, 1, 0);
        assert_eq!((loss.successes[1], loss.failures[1]), (0, 1));
        assert_eq!(loss.successes[0] + loss.failures[0], 0);
    }

    #[test]
    fn update_fold_matches_tally() {
        let mut rng = seeded_rng(2);
        let mut stats = BanditStats::new(4);
        let mut tally = [[0u64; 2]; 4];
        for _ in 0..100 {
            let lever = rng.random_range(0..4);
            let reward = rng.random_range(0..2u8);
            stats = bandit_update(&stats, lever, reward);
            tally[lever][reward as usize] += 1;
        }
        for j in 0..4 {
            assert_eq!(stats.successes[j], tally[j][1]);
            assert_eq!(stats.failures[j], tally[j][0]);
        }
    }

    #[test]
    fn thompson_symmetry_and_single_lever() {
        let mut rng = seeded_rng(3);
        let stats = BanditStats::new(2);
        let n = 100_000;
        let zeros = (0..n).filter(|_| thompson_act(&stats, &mut rng) == 0).count();
        assert!((zeros as f64 / n as f64 - 0.5).abs() < 0.01);
        let one = BanditStats::new(1);
        assert!((0..100).all(|_| thompson_act(&one, &mut rng) == 0));
    }

    #[test]
    fn greedy_and_uniform_limits() {
        let mut rng = seeded_rng(4);
        let mut stats = BanditStats::new(3);
        stats.successes[2] = 5;
        assert!((0..1000).all(|t| epsilon_greedy_act(&stats, t, 0.0, 0.99, &mut rng) == 2));
        let mut counts = [0usize; 3];
        for t in 0..30_000 {
            counts[epsilon_greedy_act(&stats, t, 1.0, 1.0, &mut rng)] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.015);
        }
    }

    #[test]
    fn exploration_rate_after_decay() {
        // With one lever clearly best, the other two are only hit while
        // exploring; each gets 1/3 of the explorations.
        let mut rng = seeded_rng(5);
        let mut stats = BanditStats::new(3);
        stats.successes[0] = 50;
        let n = 200_000;
        let off = (0..n).filter(|_| epsilon_greedy_act(&stats, 100, 0.1, 0.99, &mut rng) != 0).count();
        let explore = off as f64 / n as f64 * 1.5;
        let expected = 0.1 * 0.99f64.powi(100);
        assert!((expected - 0.0366).abs() < 1e-4);
        assert!((explore - expected).abs() < 0.005, "{explore} vs {expected}");
    }
}
