use rand::Rng;

use super::gibbs::{gibbs_sweep, MdpModeSample};
use super::model::{HyperPriors, MdpSufficientStats, PosteriorHyper};
use crate::util::argmax_random_tie;

/// Greedy action of the sampled mode at `x`, ties broken uniformly.
pub fn bcr_mdp_act<R: Rng + ?Sized>(
    sample: &mut MdpModeSample,
    x: usize,
    priors: &HyperPriors,
    rng: &mut R,
) -> usize {
    let row = sample.row(x, priors, rng);
    argmax_random_tie(&row, rng)
}

/// Control-rule agent for tabular average-reward MDPs. After every
/// transition it runs a fixed number of Gibbs sweeps, so that its current
/// sample is an (approximate) posterior draw, and acts greedily in it.
#[derive(Debug, Clone)]
pub struct BcrMdpAgent {
    stats: MdpSufficientStats,
    hyper: PosteriorHyper,
    sample: MdpModeSample,
    sweeps: usize,
}

impl BcrMdpAgent {
    pub fn new<R: Rng + ?Sized>(n_states: usize, n_actions: usize, priors: HyperPriors, sweeps: usize, rng: &mut R) -> Self {
        let hyper = PosteriorHyper::empty(n_states, n_actions, priors);
        let mut sample = MdpModeSample::new(n_states, n_actions);
        gibbs_sweep(&mut sample, &hyper, rng);
        Self {
            stats: MdpSufficientStats::new(n_states, n_actions),
            hyper,
            sample,
            sweeps: sweeps.max(1),
        }
    }

    pub fn stats(&self) -> &MdpSufficientStats {
        &self.stats
    }

    pub fn hyper(&self) -> &PosteriorHyper {
        &self.hyper
    }

    pub fn sample(&self) -> &MdpModeSample {
        &self.sample
    }

    pub fn act<R: Rng + ?Sized>(&mut self, x: usize, rng: &mut R) -> usize {
        let priors = *self.hyper.priors();
        bcr_mdp_act(&mut self.sample, x, &priors, rng)
    }

    pub fn observe<R: Rng + ?Sized>(&mut self, x: usize, a: usize, next: usize, reward: f64, rng: &mut R) {
        self.stats.record(x, a, next, reward);
        self.hyper.refresh_pair(&self.stats, x, a);
        for _ in 0..self.sweeps {
            gibbs_sweep(&mut self.sample, &self.hyper, rng);
        }
    }
}
