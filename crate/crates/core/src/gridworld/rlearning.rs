//! R-learning with count-based exploration.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::util::argmax_random_tie;
use crate::{Error, Result};

/// When the average-reward estimate is updated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoUpdate {
    #[default]
    Always,
    /// Only after actions that were greedy in `Q`.
    GreedyOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RLearningParams {
    pub alpha: f64,
    pub beta: f64,
    /// Exploration bonus constant `C`.
    pub c: f64,
    /// Probability of taking the bonus-maximizing action.
    pub p_exp: f64,
    #[serde(default)]
    pub rho_update: RhoUpdate,
}

impl RLearningParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| v > 0.0 && v <= 1.0;
        if !unit(self.alpha) || !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!(
                "learning rates alpha={} beta={} outside (0, 1]",
                self.alpha, self.beta
            )));
        }
        if !(self.c >= 0.0) || !(0.0..=1.0).contains(&self.p_exp) {
            return Err(Error::InvalidParameter(format!(
                "need C >= 0 and p_exp in [0, 1], got C={} p_exp={}",
                self.c, self.p_exp
            )));
        }
        Ok(())
    }
}

/// Tabular R-learner: relative Q-values, average reward `ρ` and visit
/// counts `F(x, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RLearnerState {
    pub params: RLearningParams,
    n_actions: usize,
    q: Vec<f64>,
    visits: Vec<u64>,
    rho: f64,
}

impl RLearnerState {
    pub fn new(n_states: usize, n_actions: usize, params: RLearningParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            n_actions,
            q: vec![0.0; n_states * n_actions],
            visits: vec![0; n_states * n_actions],
            rho: 0.0,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn q(&self, x: usize, a: usize) -> f64 {
        self.q[x * self.n_actions + a]
    }

    pub fn set_q(&mut self, x: usize, a: usize, value: f64) {
        self.q[x * self.n_actions + a] = value;
    }

    pub fn visits(&self, x: usize, a: usize) -> u64 {
        self.visits[x * self.n_actions + a]
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn set_rho(&mut self, rho: f64) {
        self.rho = rho;
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.q[x * self.n_actions..(x + 1) * self.n_actions]
    }

    fn max_q(&self, x: usize) -> f64 {
        self.row(x).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Q(x, a) + C / F(x, a)`, infinite for untried actions.
    pub fn bonus_score(&self, x: usize, a: usize) -> f64 {
        match self.visits(x, a) {
            0 => f64::INFINITY,
            f => self.q(x, a) + self.params.c / f as f64,
        }
    }
}

/// With probability `p_exp` maximizes `Q + C / F`, otherwise `Q`. Returns
/// the action and whether it is greedy in `Q`.
pub fn uncertainty_explore_act<R: Rng + ?Sized>(state: &RLearnerState, x: usize, rng: &mut R) -> (usize, bool) {
    let row = state.row(x);
    let a = if rng.random::<f64>() < state.params.p_exp {
        let scores: Vec<f64> = (0..state.n_actions).map(|a| state.bonus_score(x, a)).collect();
        argmax_random_tie(&scores, rng)
    } else {
        argmax_random_tie(row, rng)
    };
    (a, row[a] >= state.max_q(x))
}

/// One R-learning update after `(x, a, r, x')`. `ρ` uses the pre-update
/// `Q(x, a)`. `greedy` marks whether `a` was greedy, for
/// [`RhoUpdate::GreedyOnly`].
pub fn rlearning_step(state: &mut RLearnerState, x: usize, a: usize, reward: f64, next: usize, greedy: bool) {
    let i = x * state.n_actions + a;
    let (alpha, beta) = (state.params.alpha, state.params.beta);
    let q_old = state.q[i];
    let next_max = state.max_q(next);
    state.q[i] = (1.0 - alpha) * q_old + alpha * (reward - state.rho + next_max);
    if greedy || state.params.rho_update == RhoUpdate::Always {
        state.rho = (1.0 - beta) * state.rho + beta * (reward + next_max - q_old);
    }
    state.visits[i] += 1;
}
