#![allow(dead_code)]

use rand::Rng;

use bayes_control::engine::ModeSet;
use bayes_control::interaction::{Action, InteractionHistory, Observation, OperationMode, StationaryMode};

/// A random positive distribution over `n` outcomes, bounded away from zero.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / z).collect()
}

/// Stationary mode tables: `policies[m]` and `hypotheses[m][a]`.
#[derive(Debug, Clone)]
pub struct ModeTables {
    pub prior: Vec<f64>,
    pub policies: Vec<Vec<f64>>,
    pub hypotheses: Vec<Vec<Vec<f64>>>,
}

impl ModeTables {
    pub fn random<R: Rng + ?Sized>(n_modes: usize, n_actions: usize, n_obs: usize, rng: &mut R) -> Self {
        Self {
            prior: random_distribution(n_modes, rng),
            policies: (0..n_modes).map(|_| random_distribution(n_actions, rng)).collect(),
            hypotheses: (0..n_modes)
                .map(|_| (0..n_actions).map(|_| random_distribution(n_obs, rng)).collect())
                .collect(),
        }
    }

    /// Every mode shares the first mode's hypotheses.
    pub fn shared_hypotheses<R: Rng + ?Sized>(n_modes: usize, n_actions: usize, n_obs: usize, rng: &mut R) -> Self {
        let mut t = Self::random(n_modes, n_actions, n_obs, rng);
        let shared = t.hypotheses[0].clone();
        for h in &mut t.hypotheses {
            *h = shared.clone();
        }
        t
    }

    pub fn mode_set(&self) -> ModeSet {
        let modes = self
            .policies
            .iter()
            .zip(&self.hypotheses)
            .enumerate()
            .map(|(i, (p, h))| {
                Box::new(StationaryMode::new(format!("m{i}"), p.clone(), h.clone()).unwrap()) as Box<dyn OperationMode>
            })
            .collect();
        ModeSet::new(modes, self.prior.clone()).unwrap()
    }

    /// Unnormalized log posterior computed straight from the tables.
    pub fn log_joint(&self, history: &InteractionHistory) -> Vec<f64> {
        (0..self.prior.len())
            .map(|m| {
                self.prior[m].ln()
                    + history
                        .steps()
                        .iter()
                        .map(|(a, o)| self.hypotheses[m][a.0][o.0].ln())
                        .sum::<f64>()
            })
            .collect()
    }
}

pub fn random_history<R: Rng + ?Sized>(len: usize, n_actions: usize, n_obs: usize, rng: &mut R) -> InteractionHistory {
    InteractionHistory::from_steps(
        (0..len)
            .map(|_| (Action(rng.random_range(0..n_actions)), Observation(rng.random_range(0..n_obs))))
            .collect(),
    )
}

/// Normalizes log-weights without touching library helpers.
pub fn normalize_log(w: &[f64]) -> Vec<f64> {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z = max + w.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    w.iter().map(|x| x - z).collect()
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
