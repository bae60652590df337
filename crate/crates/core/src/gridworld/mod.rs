//! Grid-world with one-way membranes, the Gibbs-sampling control-rule agent
//! for average-reward MDPs, and the R-learning baseline.
//!
//! An MDP operation mode is a table of relative Q-values plus an average
//! reward `ρ`. Rearranging the average-reward Bellman equation, the mode
//! predicts the reward of a transition `(x, a, x')` to be
//! `ξ(x, a, x') = Q(x, a) + ρ − max_a' Q(x', a')` up to Gaussian noise, and
//! its policy is greedy in `Q`. A normal prior on every `ξ` is conjugate, and
//! the posterior over `(Q, ρ)` is sampled with one Gibbs sweep per step.

mod agent;
mod env;
mod gibbs;
mod map;
mod model;
mod rlearning;
mod solve;

pub use agent::{bcr_mdp_act, BcrMdpAgent};
pub use env::{
    decode_observation, encode_observation, grid_transition, transition_law, GridEnvironment, GridStep,
    RewardTag,
};
pub use gibbs::{gibbs_sample_q, gibbs_sample_rho, gibbs_sweep, GaussianDraw, MdpModeSample};
pub use map::{inverted_cups, parse_grid_map, CellKind, Direction, GridMap, GridParams, MapError, INVERTED_CUPS};
pub use model::{
    posterior_hyperparams, update_stats, HyperPriors, MdpSufficientStats, PosteriorHyper, TripleHyper,
    TripleStat,
};
pub use rlearning::{rlearning_step, uncertainty_explore_act, RLearnerState, RLearningParams, RhoUpdate};
pub use solve::{evaluate_policy, solve_average_reward, AverageRewardSolution};
