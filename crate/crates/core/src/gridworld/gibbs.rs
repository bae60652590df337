//! Gibbs sampling over `(Q, ρ)`.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::model::{HyperPriors, PosteriorHyper};
use crate::{Error, Result};

/// One sampled operation mode: relative Q-values and an average reward.
///
/// Only pairs that have been observed hold an explicit Q-value. Any other
/// pair is scored by a prior draw that stays fixed until the next sweep.
#[derive(Debug, Clone)]
pub struct MdpModeSample {
    n_actions: usize,
    q: Vec<f64>,
    represented: Vec<bool>,
    rho: f64,
    prior_draw: Vec<f64>,
    prior_stamp: Vec<u64>,
    sweep: u64,
}

/// A normal draw together with the conditional it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDraw {
    pub value: f64,
    pub mean: f64,
    pub precision: f64,
}

fn normal<R: Rng + ?Sized>(mean: f64, precision: f64, rng: &mut R) -> GaussianDraw {
    let value = Normal::new(mean, precision.recip().sqrt())
        .expect("finite mean and positive precision")
        .sample(rng);
    GaussianDraw {
        value,
        mean,
        precision,
    }
}

impl MdpModeSample {
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        let n = n_states * n_actions;
        Self {
            n_actions,
            q: vec![0.0; n],
            represented: vec![false; n],
            rho: 0.0,
            prior_draw: vec![0.0; n],
            prior_stamp: vec![0; n],
            sweep: 1,
        }
    }

    pub fn n_states(&self) -> usize {
        self.q.len() / self.n_actions
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn set_rho(&mut self, rho: f64) {
        self.rho = rho;
    }

    /// Explicit Q-value of `(x, a)`, if represented.
    pub fn q(&self, x: usize, a: usize) -> Option<f64> {
        let i = x * self.n_actions + a;
        self.represented[i].then_some(self.q[i])
    }

    pub fn set_q(&mut self, x: usize, a: usize, value: f64) {
        let i = x * self.n_actions + a;
        self.q[i] = value;
        self.represented[i] = true;
    }

    /// Shifts every explicit Q-value so that their mean is `level`.
    ///
    /// The likelihood only sees differences of Q-values, so the common level
    /// is free and the max in `M` makes it creep upwards sweep after sweep.
    /// Left alone it outgrows the prior draws of untried pairs, which are
    /// then never tried.
    pub fn pin_level(&mut self, level: f64) {
        let n = self.represented_pairs();
        if n == 0 {
            return;
        }
        let mean = self
            .q
            .iter()
            .zip(&self.represented)
            .filter(|(_, r)| **r)
            .map(|(q, _)| q)
            .sum::<f64>()
            / n as f64;
        for (q, r) in self.q.iter_mut().zip(&self.represented) {
            if *r {
                *q += level - mean;
            }
        }
    }

    pub fn represented_pairs(&self) -> usize {
        self.represented.iter().filter(|r| **r).count()
    }

    /// Starts a new sweep: prior draws for unrepresented pairs are refreshed
    /// on next use.
    pub fn begin_sweep(&mut self) {
        self.sweep += 1;
    }

    /// Q-value of `(x, a)`, or this sweep's prior draw if unrepresented.
    pub fn value<R: Rng + ?Sized>(&mut self, x: usize, a: usize, priors: &HyperPriors, rng: &mut R) -> f64 {
        let i = x * self.n_actions + a;
        if self.represented[i] {
            return self.q[i];
        }
        if self.prior_stamp[i] != self.sweep {
            self.prior_draw[i] = normal(priors.mu0, priors.lambda0, rng).value;
            self.prior_stamp[i] = self.sweep;
        }
        self.prior_draw[i]
    }

    /// `M(x) = max_a Q(x, a)`.
    pub fn state_max<R: Rng + ?Sized>(&mut self, x: usize, priors: &HyperPriors, rng: &mut R) -> f64 {
        (0..self.n_actions)
            .map(|a| self.value(x, a, priors, rng))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The Q-row of `x`, with prior draws for unrepresented actions.
    pub fn row<R: Rng + ?Sized>(&mut self, x: usize, priors: &HyperPriors, rng: &mut R) -> Vec<f64> {
        (0..self.n_actions).map(|a| self.value(x, a, priors, rng)).collect()
    }
}

/// Draws `ρ` from its full conditional
/// `N(Σ λ (μ − Q(x,a) + M(x')) / S, 1 / S)` with `S = Σ λ` over observed
/// triples. The sample's `ρ` is left untouched.
pub fn gibbs_sample_rho<R: Rng + ?Sized>(
    sample: &mut MdpModeSample,
    hyper: &PosteriorHyper,
    rng: &mut R,
) -> Result<GaussianDraw> {
    let s = hyper.total_precision();
    if s <= 0.0 {
        return Err(Error::NoData);
    }
    let priors = *hyper.priors();
    let mut acc = 0.0;
    for x in 0..hyper.n_states() {
        for a in 0..hyper.n_actions() {
            if !hyper.has_data(x, a) {
                continue;
            }
            let q = sample.value(x, a, &priors, rng);
            for t in hyper.pair(x, a) {
                acc += t.lambda * (t.mu - q + sample.state_max(t.next, &priors, rng));
            }
        }
    }
    Ok(normal(acc / s, s, rng))
}

/// Draws `Q(x, a)` from its conditional
/// `N(Σ_x' λ (μ − ρ + M(x')) / S(x,a), 1 / S(x,a))`, holding every `M` at its
/// current value. An unobserved pair gets a prior draw. The sample is left
/// untouched.
pub fn gibbs_sample_q<R: Rng + ?Sized>(
    sample: &mut MdpModeSample,
    hyper: &PosteriorHyper,
    x: usize,
    a: usize,
    rng: &mut R,
) -> GaussianDraw {
    let priors = *hyper.priors();
    let s = hyper.pair_precision(x, a);
    if s <= 0.0 {
        return normal(priors.mu0, priors.lambda0, rng);
    }
    let rho = sample.rho();
    let mut acc = 0.0;
    for t in hyper.pair(x, a) {
        acc += t.lambda * (t.mu - rho + sample.state_max(t.next, &priors, rng));
    }
    normal(acc / s, s, rng)
}

/// One sweep: `ρ` first, then every observed pair in row-major order.
///
/// Pairs observed for the first time are seeded with their current prior
/// draw. Without any data `ρ` is drawn from the prior.
pub fn gibbs_sweep<R: Rng + ?Sized>(sample: &mut MdpModeSample, hyper: &PosteriorHyper, rng: &mut R) {
    let priors = *hyper.priors();
    for x in 0..hyper.n_states() {
        for a in 0..hyper.n_actions() {
            if hyper.has_data(x, a) && sample.q(x, a).is_none() {
                let v = sample.value(x, a, &priors, rng);
                sample.set_q(x, a, v);
            }
        }
    }
    sample.begin_sweep();
    let rho = match gibbs_sample_rho(sample, hyper, rng) {
        Ok(draw) => draw.value,
        Err(_) => normal(priors.mu0, priors.lambda0, rng).value,
    };
    sample.set_rho(rho);
    for x in 0..hyper.n_states() {
        for a in 0..hyper.n_actions() {
            if hyper.has_data(x, a) {
                let draw = gibbs_sample_q(sample, hyper, x, a, rng);
                sample.set_q(x, a, draw.value);
            }
        }
    }
    sample.pin_level(priors.mu0);
}
