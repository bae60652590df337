//! Sufficient statistics and conjugate posterior hyperparameters of the
//! Gaussian reward model.

use serde::{Deserialize, Serialize};

/// Visit count and running mean reward of one transition `(x, a, x')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleStat {
    pub next: usize,
    pub count: u64,
    pub mean_reward: f64,
}

/// Observed transitions grouped by `(x, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpSufficientStats {
    n_states: usize,
    n_actions: usize,
    pairs: Vec<Vec<TripleStat>>,
}

impl MdpSufficientStats {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            pairs: vec![Vec::new(); n_states * n_actions],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Successor statistics of `(x, a)`, in order of first visit.
    pub fn pair(&self, x: usize, a: usize) -> &[TripleStat] {
        &self.pairs[x * self.n_actions + a]
    }

    pub fn triple(&self, x: usize, a: usize, next: usize) -> Option<&TripleStat> {
        self.pair(x, a).iter().find(|t| t.next == next)
    }

    pub fn total_transitions(&self) -> u64 {
        self.pairs.iter().flatten().map(|t| t.count).sum()
    }

    /// Records one transition in place.
    pub fn record(&mut self, x: usize, a: usize, next: usize, reward: f64) {
        let pair = &mut self.pairs[x * self.n_actions + a];
        match pair.iter_mut().find(|t| t.next == next) {
            Some(t) => {
                t.count += 1;
                t.mean_reward += (reward - t.mean_reward) / t.count as f64;
            }
            None => pair.push(TripleStat {
                next,
                count: 1,
                mean_reward: reward,
            }),
        }
    }
}

/// Functional form of [`MdpSufficientStats::record`].
pub fn update_stats(stats: &MdpSufficientStats, x: usize, a: usize, next: usize, reward: f64) -> MdpSufficientStats {
    let mut out = stats.clone();
    out.record(x, a, next, reward);
    out
}

/// Prior mean and precision of every `ξ(x, a, x')` and the precision of the
/// reward noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperPriors {
    pub mu0: f64,
    pub lambda0: f64,
    pub precision: f64,
}

impl Default for HyperPriors {
    fn default() -> Self {
        Self {
            mu0: 1.0,
            lambda0: 1.0,
            precision: 1.0,
        }
    }
}

impl HyperPriors {
    /// Posterior `(μ, λ)` of a triple seen `count` times with mean `mean_reward`.
    pub fn posterior(&self, count: u64, mean_reward: f64) -> (f64, f64) {
        let data = self.precision * count as f64;
        let lambda = self.lambda0 + data;
        ((self.lambda0 * self.mu0 + data * mean_reward) / lambda, lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleHyper {
    pub next: usize,
    pub mu: f64,
    pub lambda: f64,
}

/// Posterior hyperparameters of every observed triple together with the
/// precision totals the Gibbs conditionals need.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorHyper {
    priors: HyperPriors,
    n_actions: usize,
    pairs: Vec<Vec<TripleHyper>>,
    pair_precision: Vec<f64>,
    total_precision: f64,
}

impl PosteriorHyper {
    pub fn empty(n_states: usize, n_actions: usize, priors: HyperPriors) -> Self {
        Self {
            priors,
            n_actions,
            pairs: vec![Vec::new(); n_states * n_actions],
            pair_precision: vec![0.0; n_states * n_actions],
            total_precision: 0.0,
        }
    }

    pub fn priors(&self) -> &HyperPriors {
        &self.priors
    }

    pub fn n_states(&self) -> usize {
        self.pairs.len() / self.n_actions
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn pair(&self, x: usize, a: usize) -> &[TripleHyper] {
        &self.pairs[x * self.n_actions + a]
    }

    /// `S(x, a)`, the summed precision of the successors of `(x, a)`.
    pub fn pair_precision(&self, x: usize, a: usize) -> f64 {
        self.pair_precision[x * self.n_actions + a]
    }

    /// `S`, the summed precision over all observed triples.
    pub fn total_precision(&self) -> f64 {
        self.total_precision
    }

    pub fn has_data(&self, x: usize, a: usize) -> bool {
        !self.pair(x, a).is_empty()
    }

    /// Recomputes the entries of `(x, a)` from `stats`.
    pub fn refresh_pair(&mut self, stats: &MdpSufficientStats, x: usize, a: usize) {
        let i = x * self.n_actions + a;
        let priors = self.priors;
        self.pairs[i] = stats
            .pair(x, a)
            .iter()
            .map(|t| {
                let (mu, lambda) = priors.posterior(t.count, t.mean_reward);
                TripleHyper {
                    next: t.next,
                    mu,
                    lambda,
                }
            })
            .collect();
        let s: f64 = self.pairs[i].iter().map(|t| t.lambda).sum();
        self.total_precision += s - self.pair_precision[i];
        self.pair_precision[i] = s;
    }
}

/// Posterior hyperparameters of every observed triple.
pub fn posterior_hyperparams(stats: &MdpSufficientStats, priors: HyperPriors) -> PosteriorHyper {
    let mut hyper = PosteriorHyper::empty(stats.n_states(), stats.n_actions(), priors);
    for x in 0..stats.n_states() {
        for a in 0..stats.n_actions() {
            hyper.refresh_pair(stats, x, a);
        }
    }
    hyper.total_precision = hyper.pair_precision.iter().sum();
    hyper
}
