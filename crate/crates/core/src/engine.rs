//! Posterior bookkeeping over a finite set of operation modes.
//!
//! The control rule weights each mode by its prior times the likelihood of the
//! *observations* only. The agent's own actions enter the history as
//! interventions: a mode's policy never multiplies into its weight. The naive
//! mixture, which also conditions on actions, is provided for contrast.
//!
//! All weights are kept as natural logs and renormalized once per update.

use std::sync::Arc;

use rand::Rng;

use crate::interaction::{
    observation_log_likelihood, Action, Agent, InteractionHistory, Observation, OperationMode,
};
use crate::util::{log_sum_exp, sample_unchecked, validate_distribution};
use crate::{Error, Result};

/// Operation modes with their prior. A zero prior entry excludes the mode.
pub struct ModeSet {
    modes: Vec<Box<dyn OperationMode>>,
    prior: Vec<f64>,
}

impl ModeSet {
    pub fn new(modes: Vec<Box<dyn OperationMode>>, prior: Vec<f64>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::EmptyModeSet);
        }
        if modes.len() != prior.len() {
            return Err(Error::PriorLength {
                modes: modes.len(),
                prior: prior.len(),
            });
        }
        validate_distribution(&prior)?;
        let (na, no) = (modes[0].n_actions(), modes[0].n_observations());
        if modes.iter().any(|m| m.n_actions() != na || m.n_observations() != no) {
            return Err(Error::InvalidParameter(
                "all modes must share the action and observation alphabets".into(),
            ));
        }
        Ok(Self { modes, prior })
    }

    pub fn uniform(modes: Vec<Box<dyn OperationMode>>) -> Result<Self> {
        let n = modes.len().max(1);
        Self::new(modes, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode(&self, index: usize) -> &dyn OperationMode {
        self.modes[index].as_ref()
    }

    pub fn modes(&self) -> impl Iterator<Item = &dyn OperationMode> {
        self.modes.iter().map(|m| m.as_ref())
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn n_actions(&self) -> usize {
        self.modes[0].n_actions()
    }

    pub fn n_observations(&self) -> usize {
        self.modes[0].n_observations()
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index < self.len() {
            Ok(())
        } else {
            Err(Error::ModeIndex {
                index,
                len: self.len(),
            })
        }
    }
}

/// Normalized log-weights aligned with a [`ModeSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModePosterior {
    log_weights: Vec<f64>,
}

impl ModePosterior {
    pub fn from_prior(modes: &ModeSet) -> Self {
        Self {
            log_weights: modes.prior.iter().map(|p| p.ln()).collect(),
        }
    }

    /// Normalizes arbitrary log-weights. At least one must be finite.
    pub fn from_log_weights(mut log_weights: Vec<f64>) -> Result<Self> {
        let z = log_sum_exp(&log_weights);
        if !z.is_finite() {
            return Err(Error::InvalidParameter(
                "log-weights must contain a finite entry".into(),
            ));
        }
        for w in &mut log_weights {
            *w -= z;
        }
        Ok(Self { log_weights })
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.log_weights[index].exp()
    }

    /// Adds per-mode log factors and renormalizes. `step` is only used for the
    /// error report.
    fn reweighted(&self, factors: impl Iterator<Item = f64>, step: usize) -> Result<Self> {
        let updated: Vec<f64> = self
            .log_weights
            .iter()
            .zip(factors)
            .map(|(w, f)| if *w == f64::NEG_INFINITY { *w } else { w + f })
            .collect();
        if updated.iter().all(|w| *w == f64::NEG_INFINITY) {
            return Err(Error::ModelClassExhausted { step });
        }
        Self::from_log_weights(updated)
    }
}

fn ln_prob(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Control-rule posterior update for the step `(action, observation)` that
/// followed `history`. Only the observation contributes evidence.
pub fn bcr_observe(
    posterior: &ModePosterior,
    modes: &ModeSet,
    history: &InteractionHistory,
    action: Action,
    observation: Observation,
) -> Result<ModePosterior> {
    let factors = modes
        .modes()
        .map(|m| ln_prob(m.hypothesis(history, action)[observation.0]));
    posterior.reweighted(factors, history.len() + 1)
}

/// Samples a mode from the posterior and an action from that mode's policy.
/// Returns the action and the index of the mode that produced it.
pub fn bcr_act<R: Rng + ?Sized>(
    posterior: &ModePosterior,
    modes: &ModeSet,
    history: &InteractionHistory,
    rng: &mut R,
) -> Result<(Action, usize)> {
    let mode = sample_unchecked(&posterior.probabilities(), rng);
    let action = act_with_mode(modes, mode, history, rng)?;
    Ok((action, mode))
}

fn act_with_mode<R: Rng + ?Sized>(
    modes: &ModeSet,
    mode: usize,
    history: &InteractionHistory,
    rng: &mut R,
) -> Result<Action> {
    let policy = modes.mode(mode).policy(history);
    validate_distribution(&policy)?;
    Ok(Action(sample_unchecked(&policy, rng)))
}

/// A symbol fed to the naive mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evidence {
    /// The agent's own action, conditioned on as if it were data.
    Action(Action),
    /// An observation answering `action`.
    Observation {
        action: Action,
        observation: Observation,
    },
}

/// Bayesian mixture update that treats actions as evidence as well.
///
/// For `Evidence::Action` the factor is `P(a_t | m, history)`; for an
/// observation it is the hypothesis probability, as in [`bcr_observe`].
pub fn naive_update(
    posterior: &ModePosterior,
    modes: &ModeSet,
    history: &InteractionHistory,
    symbol: Evidence,
) -> Result<ModePosterior> {
    match symbol {
        Evidence::Action(a) => {
            let factors = modes.modes().map(|m| ln_prob(m.policy(history)[a.0]));
            posterior.reweighted(factors, history.len() + 1)
        }
        Evidence::Observation {
            action,
            observation,
        } => bcr_observe(posterior, modes, history, action, observation),
    }
}

/// `P(a | history) = Σ_m P(a | m, history) P(m | history)`.
pub fn predictive_action_distribution(
    posterior: &ModePosterior,
    modes: &ModeSet,
    history: &InteractionHistory,
) -> Vec<f64> {
    let mut mix = vec![0.0; modes.n_actions()];
    for (m, w) in modes.modes().zip(posterior.probabilities()) {
        if w == 0.0 {
            continue;
        }
        for (acc, p) in mix.iter_mut().zip(m.policy(history)) {
            *acc += w * p;
        }
    }
    mix
}

/// Causal mixture weights evaluated in one shot from the whole history:
/// prior times the product of observation likelihoods, normalized.
pub fn causal_weights(modes: &ModeSet, history: &InteractionHistory) -> Result<ModePosterior> {
    let logs: Vec<f64> = modes
        .modes()
        .zip(modes.prior())
        .map(|(m, p)| ln_prob(*p) + observation_log_likelihood(m, history))
        .collect();
    if logs.iter().all(|w| *w == f64::NEG_INFINITY) {
        return Err(Error::ModelClassExhausted {
            step: history.len(),
        });
    }
    ModePosterior::from_log_weights(logs)
}

/// Agent following the control rule over a shared mode set.
///
/// With `hold > 1` the sampled mode is kept for that many consecutive actions
/// before a fresh one is drawn.
pub struct BcrAgent {
    modes: Arc<ModeSet>,
    posterior: ModePosterior,
    hold: usize,
    current: Option<(usize, usize)>,
    acting_modes: Vec<usize>,
    posterior_log: Option<Vec<Vec<f64>>>,
}

impl BcrAgent {
    pub fn new(modes: Arc<ModeSet>) -> Self {
        let posterior = ModePosterior::from_prior(&modes);
        Self {
            modes,
            posterior,
            hold: 1,
            current: None,
            acting_modes: Vec::new(),
            posterior_log: None,
        }
    }

    pub fn with_hold(mut self, hold: usize) -> Self {
        self.hold = hold.max(1);
        self
    }

    /// Keep the posterior before every action (and the final one).
    pub fn recording(mut self) -> Self {
        self.posterior_log = Some(vec![self.posterior.probabilities()]);
        self
    }

    pub fn posterior(&self) -> &ModePosterior {
        &self.posterior
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    /// Mode that generated each action so far.
    pub fn acting_modes(&self) -> &[usize] {
        &self.acting_modes
    }

    /// Posterior probabilities recorded before each step; the last entry is
    /// the posterior after the final observation.
    pub fn posterior_log(&self) -> Option<&[Vec<f64>]> {
        self.posterior_log.as_deref()
    }
}

impl Agent for BcrAgent {
    fn act<R: Rng + ?Sized>(&mut self, history: &InteractionHistory, rng: &mut R) -> Result<Action> {
        let mode = match self.current {
            Some((mode, left)) if left > 0 => {
                self.current = Some((mode, left - 1));
                mode
            }
            _ => {
                let mode = sample_unchecked(&self.posterior.probabilities(), rng);
                self.current = Some((mode, self.hold - 1));
                mode
            }
        };
        let action = act_with_mode(&self.modes, mode, history, rng)?;
        self.acting_modes.push(mode);
        Ok(action)
    }

    fn observe(
        &mut self,
        history: &InteractionHistory,
        action: Action,
        observation: Observation,
    ) -> Result<()> {
        self.posterior = bcr_observe(&self.posterior, &self.modes, history, action, observation)?;
        if let Some(log) = &mut self.posterior_log {
            log.push(self.posterior.probabilities());
        }
        Ok(())
    }
}

/// The naive mixture agent: samples actions from the predictive law but also
/// updates its weights on its own actions.
pub struct NaiveAgent {
    modes: Arc<ModeSet>,
    posterior: ModePosterior,
}

impl NaiveAgent {
    pub fn new(modes: Arc<ModeSet>) -> Self {
        let posterior = ModePosterior::from_prior(&modes);
        Self { modes, posterior }
    }

    pub fn posterior(&self) -> &ModePosterior {
        &self.posterior
    }
}

impl Agent for NaiveAgent {
    fn act<R: Rng + ?Sized>(&mut self, history: &InteractionHistory, rng: &mut R) -> Result<Action> {
        let (action, _) = bcr_act(&self.posterior, &self.modes, history, rng)?;
        self.posterior = naive_update(&self.posterior, &self.modes, history, Evidence::Action(action))?;
        Ok(action)
    }

    fn observe(
        &mut self,
        history: &InteractionHistory,
        action: Action,
        observation: Observation,
    ) -> Result<()> {
        self.posterior = naive_update(
            &self.posterior,
            &self.modes,
            history,
            Evidence::Observation {
                action,
                observation,
            },
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::StationaryMode;
    use crate::seeded_rng;
    use crate::util::{one_hot, total_variation, uniform};

    fn boxed(m: StationaryMode) -> Box<dyn OperationMode> {
        Box::new(m)
    }

    fn coin_pair() -> ModeSet {
        ModeSet::uniform(vec![
            boxed(StationaryMode::bernoulli("h", vec![1.0], &[0.9]).unwrap()),
            boxed(StationaryMode::bernoulli("t", vec![1.0], &[0.1]).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn single_mode_stays_certain() {
        let modes = ModeSet::uniform(vec![boxed(
            StationaryMode::bernoulli("only", vec![1.0], &[0.3]).unwrap(),
        )])
        .unwrap();
        let post = ModePosterior::from_prior(&modes);
        let post = bcr_observe(&post, &modes, &InteractionHistory::new(), Action(0), Observation(1)).unwrap();
        assert_eq!(post.probabilities(), vec![1.0]);
    }

    #[test]
    fn coin_update_matches_hand_bayes() {
        let modes = coin_pair();
        let post = ModePosterior::from_prior(&modes);
        let post = bcr_observe(&post, &modes, &InteractionHistory::new(), Action(0), Observation(1)).unwrap();
        let p = post.probabilities();
        assert!((p[0] - 0.9).abs() < 1e-12 && (p[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn exhausted_class_is_an_error() {
        let modes = ModeSet::uniform(vec![
            boxed(StationaryMode::bernoulli("a", vec![1.0], &[1.0]).unwrap()),
            boxed(StationaryMode::bernoulli("b", vec![1.0], &[1.0]).unwrap()),
        ])
        .unwrap();
        let post = ModePosterior::from_prior(&modes);
        let err = bcr_observe(&post, &modes, &InteractionHistory::new(), Action(0), Observation(0));
        assert!(matches!(err, Err(Error::ModelClassExhausted { step: 1 })));
    }

    fn policy_pair() -> ModeSet {
        // Identical hypotheses, different policies.
        ModeSet::uniform(vec![
            boxed(StationaryMode::bernoulli("det", one_hot(2, 0), &[0.5, 0.5]).unwrap()),
            boxed(StationaryMode::bernoulli("uni", uniform(2), &[0.5, 0.5]).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn naive_update_conditions_on_actions() {
        let modes = policy_pair();
        let prior = ModePosterior::from_prior(&modes);
        let h = InteractionHistory::new();
        let naive = naive_update(&prior, &modes, &h, Evidence::Action(Action(0))).unwrap();
        let p = naive.probabilities();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-12 && (p[1] - 1.0 / 3.0).abs() < 1e-12);

        // The causal update only sees the observation, which both modes
        // predict identically.
        let causal = bcr_observe(&prior, &modes, &h, Action(0), Observation(1)).unwrap();
        assert!(total_variation(&causal.probabilities(), &[0.5, 0.5]) < 1e-15);
    }

    #[test]
    fn predictive_is_mixture_of_policies() {
        let modes = ModeSet::uniform(vec![
            boxed(StationaryMode::bernoulli("a", one_hot(2, 0), &[0.5, 0.5]).unwrap()),
            boxed(StationaryMode::bernoulli("b", one_hot(2, 1), &[0.5, 0.5]).unwrap()),
        ])
        .unwrap();
        let post = ModePosterior::from_prior(&modes);
        let p = predictive_action_distribution(&post, &modes, &InteractionHistory::new());
        assert_eq!(p, vec![0.5, 0.5]);

        let single = ModeSet::uniform(vec![boxed(
            StationaryMode::bernoulli("c", vec![0.2, 0.8], &[0.5, 0.5]).unwrap(),
        )])
        .unwrap();
        let p = predictive_action_distribution(&ModePosterior::from_prior(&single), &single, &InteractionHistory::new());
        assert_eq!(p, vec![0.2, 0.8]);
    }

    #[test]
    fn certain_posterior_acts_deterministically() {
        let modes = ModeSet::new(
            vec![
                boxed(StationaryMode::bernoulli("a", one_hot(3, 2), &[0.5; 3]).unwrap()),
                boxed(StationaryMode::bernoulli("b", one_hot(3, 0), &[0.5; 3]).unwrap()),
            ],
            vec![1.0, 0.0],
        )
        .unwrap();
        let post = ModePosterior::from_prior(&modes);
        let mut rng = seeded_rng(5);
        for _ in 0..1000 {
            assert_eq!(bcr_act(&post, &modes, &InteractionHistory::new(), &mut rng).unwrap(), (Action(2), 0));
        }
    }

    #[test]
    fn prior_validation() {
        let make = || boxed(StationaryMode::bernoulli("a", vec![1.0], &[0.5]).unwrap());
        assert!(matches!(ModeSet::new(vec![make()], vec![0.5, 0.5]), Err(Error::PriorLength { .. })));
        assert!(ModeSet::new(vec![make(), make()], vec![0.7, 0.7]).is_err());
        assert!(matches!(ModeSet::uniform(vec![]), Err(Error::EmptyModeSet)));
    }

    #[test]
    fn tiny_likelihoods_stay_finite() {
        let modes = ModeSet::uniform(vec![
            boxed(StationaryMode::bernoulli("a", vec![1.0], &[1e-300]).unwrap()),
            boxed(StationaryMode::bernoulli("b", vec![1.0], &[2e-300]).unwrap()),
        ])
        .unwrap();
        let mut post = ModePosterior::from_prior(&modes);
        let mut h = InteractionHistory::new();
        for _ in 0..2000 {
            post = bcr_observe(&post, &modes, &h, Action(0), Observation(1)).unwrap();
            h.push_step(Action(0), Observation(1)).unwrap();
        }
        assert!(post.log_weights().iter().all(|w| !w.is_nan()));
        assert!((post.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(post.probability(1) > 0.999);
    }

    #[test]
    fn hold_keeps_mode_for_several_actions() {
        let modes = Arc::new(
            ModeSet::uniform(vec![
                boxed(StationaryMode::bernoulli("a", one_hot(2, 0), &[0.5, 0.5]).unwrap()),
                boxed(StationaryMode::bernoulli("b", one_hot(2, 1), &[0.5, 0.5]).unwrap()),
            ])
            .unwrap(),
        );
        let mut agent = BcrAgent::new(modes).with_hold(4);
        let mut rng = seeded_rng(9);
        let h = InteractionHistory::new();
        for _ in 0..40 {
            agent.act(&h, &mut rng).unwrap();
        }
        for block in agent.acting_modes().chunks(4) {
            assert!(block.iter().all(|m| *m == block[0]));
        }
    }
}
