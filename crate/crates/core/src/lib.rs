//! Adaptive control with the Bayesian control rule.
//!
//! An adaptive agent is assembled from a class of environment-specific
//! *operation modes*, each a pair of conditionals: a policy over actions and a
//! hypothesis over observations. The agent keeps a posterior over modes that
//! is updated on observations only (its own past actions are treated as
//! causal interventions and carry no evidence) and acts by sampling a mode
//! from that posterior and following its policy.
//!
//! Layout:
//!
//! - [`interaction`]: histories, operation modes, environments, and the
//!   agent/environment coupling.
//! - [`engine`]: posterior bookkeeping for finite mode sets, the control rule
//!   agent and the naive (action-conditioning) mixture for contrast.
//! - [`divergence`]: divergence processes, sub-divergence decomposition, and
//!   empirical boundedness / posterior-floor / convergence diagnostics.
//! - [`bandit`]: Bernoulli bandits with a Beta-posterior sampling agent,
//!   decaying epsilon-greedy and Gittins-index baselines.
//! - [`gridworld`]: grid-world with one-way membranes, the Gibbs-sampling MDP
//!   agent, and the R-learning baseline.
//! - [`experiment`]: configuration, parallel run orchestration, aggregation,
//!   CSV/SVG output.

pub mod bandit;
pub mod divergence;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod gridworld;
pub mod interaction;
pub mod util;

pub use error::{Error, Result};

/// Random number generator used for every simulation. Each run is seeded with
/// `base_seed + run_index`.
pub type SimRng = rand_chacha::ChaCha8Rng;

/// Seeded simulation generator.
pub fn seeded_rng(seed: u64) -> SimRng {
    use rand::SeedableRng;
    SimRng::seed_from_u64(seed)
}
