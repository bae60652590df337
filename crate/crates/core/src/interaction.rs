//! Interaction histories, operation modes and the agent/environment coupling.
//!
//! Time is discrete. At every step the agent emits an action from a finite
//! alphabet and the environment answers with an observation from another
//! finite alphabet. Composite observations (an MDP's next state plus reward,
//! say) are encoded as integer indices by the domain module; a real-valued
//! reward travels alongside on a side channel.

use rand::Rng;

use crate::util::{sample_categorical, validate_distribution};
use crate::{seeded_rng, Error, Result};

/// An action symbol, an index into the action alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Action(pub usize);

/// An observation symbol, an index into the observation alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Observation(pub usize);

/// A finite alphabet of the given cardinality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    size: usize,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParameter("alphabet must be non-empty".into()));
        }
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn check(&self, index: usize) -> Result<()> {
        if index < self.size {
            Ok(())
        } else {
            Err(Error::OutOfAlphabet {
                index,
                size: self.size,
            })
        }
    }
}

/// An interaction string `a1 o1 a2 o2 ...`, possibly ending in an action that
/// has not been answered yet.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct InteractionHistory {
    steps: Vec<(Action, Observation)>,
    pending: Option<Action>,
}

impl InteractionHistory {
    /// The empty history.
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_steps(steps: Vec<(Action, Observation)>) -> Self {
        Self {
            steps,
            pending: None,
        }
    }

    /// Number of completed action/observation pairs.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty() && self.pending.is_none()
    }

    pub fn steps(&self) -> &[(Action, Observation)] {
        &self.steps
    }

    pub fn pending_action(&self) -> Option<Action> {
        self.pending
    }

    pub fn last(&self) -> Option<(Action, Observation)> {
        self.steps.last().copied()
    }

    pub fn push_action(&mut self, action: Action) -> Result<()> {
        if self.pending.is_some() {
            return Err(Error::Misaligned("two actions without an observation"));
        }
        self.pending = Some(action);
        Ok(())
    }

    pub fn push_observation(&mut self, observation: Observation) -> Result<()> {
        let action = self
            .pending
            .take()
            .ok_or(Error::Misaligned("observation without a preceding action"))?;
        self.steps.push((action, observation));
        Ok(())
    }

    /// Appends a completed step. Fails if an action is pending.
    pub fn push_step(&mut self, action: Action, observation: Observation) -> Result<()> {
        self.push_action(action)?;
        self.push_observation(observation)
    }

    /// The first `t` completed steps.
    pub fn prefix(&self, t: usize) -> InteractionHistory {
        Self::from_steps(self.steps[..t.min(self.steps.len())].to_vec())
    }

    /// Interleaved symbol stream `a1, o1, a2, o2, ...` as raw indices.
    pub fn symbols(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(2 * self.steps.len() + 1);
        for (a, o) in &self.steps {
            out.push(a.0);
            out.push(o.0);
        }
        if let Some(a) = self.pending {
            out.push(a.0);
        }
        out
    }
}

/// An environment-specific agent: a policy `P(a | m, history)` paired with a
/// hypothesis `P(o | m, history, a)`.
///
/// Both conditionals are evaluated lazily for the history at hand.
pub trait OperationMode: Send + Sync {
    fn label(&self) -> &str;

    fn n_actions(&self) -> usize;

    fn n_observations(&self) -> usize;

    /// Distribution over the next action given completed steps `history`.
    fn policy(&self, history: &InteractionHistory) -> Vec<f64>;

    /// Distribution over the next observation given `history` and the action
    /// just issued.
    fn hypothesis(&self, history: &InteractionHistory, action: Action) -> Vec<f64>;
}

/// The world an agent is coupled with.
pub trait Environment {
    /// Samples the observation answering `action` after `history`, together
    /// with a real-valued reward tag.
    fn respond<R: Rng + ?Sized>(
        &self,
        history: &InteractionHistory,
        action: Action,
        rng: &mut R,
    ) -> Result<(Observation, f64)>;
}

/// A stateful agent driven by [`run_interaction`]. Per step: `act`, the
/// environment responds, then `observe`.
pub trait Agent {
    fn act<R: Rng + ?Sized>(&mut self, history: &InteractionHistory, rng: &mut R)
        -> Result<Action>;

    fn observe(
        &mut self,
        history: &InteractionHistory,
        action: Action,
        observation: Observation,
    ) -> Result<()>;
}

/// Uses an operation mode's hypothesis as a generative environment. This is
/// how "the true mode" is simulated.
pub struct ModeEnvironment<'a> {
    mode: &'a dyn OperationMode,
}

impl<'a> ModeEnvironment<'a> {
    pub fn new(mode: &'a dyn OperationMode) -> Self {
        Self { mode }
    }
}

impl Environment for ModeEnvironment<'_> {
    fn respond<R: Rng + ?Sized>(
        &self,
        history: &InteractionHistory,
        action: Action,
        rng: &mut R,
    ) -> Result<(Observation, f64)> {
        let probs = self.mode.hypothesis(history, action);
        let o = sample_categorical(&probs, rng)?;
        Ok((Observation(o), o as f64))
    }
}

/// One step of the coupled system: draws an action from `agent_policy` and an
/// observation from `environment`. Appending them is left to the caller.
pub fn couple_step<P, E, R>(
    agent_policy: P,
    environment: &E,
    history: &InteractionHistory,
    rng: &mut R,
) -> Result<(Action, Observation)>
where
    P: Fn(&InteractionHistory) -> Vec<f64>,
    E: Environment,
    R: Rng + ?Sized,
{
    let probs = agent_policy(history);
    let action = Action(sample_categorical(&probs, rng)?);
    let (observation, _) = environment.respond(history, action, rng)?;
    Ok((action, observation))
}

/// Runs `agent` against `environment` for exactly `t_max` steps with a fresh
/// generator seeded by `seed`.
pub fn run_interaction<A, E>(
    agent: &mut A,
    environment: &E,
    t_max: usize,
    seed: u64,
) -> Result<InteractionHistory>
where
    A: Agent,
    E: Environment,
{
    let mut rng = seeded_rng(seed);
    let mut history = InteractionHistory::new();
    for _ in 0..t_max {
        let action = agent.act(&history, &mut rng)?;
        let (observation, _) = environment.respond(&history, action, &mut rng)?;
        agent.observe(&history, action, observation)?;
        history.push_step(action, observation)?;
    }
    Ok(history)
}

/// `Σ_τ ln P(o_τ | m, ao_<τ a_τ)` over the completed steps of `history`.
///
/// Returns `-inf` as soon as one realized observation has probability zero.
pub fn observation_log_likelihood(mode: &dyn OperationMode, history: &InteractionHistory) -> f64 {
    let mut total = 0.0;
    let mut prefix = InteractionHistory::new();
    for &(a, o) in history.steps() {
        let p = mode.hypothesis(&prefix, a)[o.0];
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        total += p.ln();
        prefix.steps.push((a, o));
    }
    total
}

/// Checks a mode's conditionals at `history`. Used in tests and by callers
/// that accept user-supplied modes.
pub fn check_mode_at(mode: &dyn OperationMode, history: &InteractionHistory) -> Result<()> {
    let policy = mode.policy(history);
    if policy.len() != mode.n_actions() {
        return Err(Error::InvalidParameter(format!(
            "mode {} returned {} action probabilities for {} actions",
            mode.label(),
            policy.len(),
            mode.n_actions()
        )));
    }
    validate_distribution(&policy)?;
    for a in 0..mode.n_actions() {
        let hyp = mode.hypothesis(history, Action(a));
        if hyp.len() != mode.n_observations() {
            return Err(Error::InvalidParameter(format!(
                "mode {} returned {} observation probabilities for {} observations",
                mode.label(),
                hyp.len(),
                mode.n_observations()
            )));
        }
        validate_distribution(&hyp)?;
    }
    Ok(())
}

/// A stationary mode: history-independent policy, action-dependent but
/// history-independent observation law. Covers coin worlds and
/// Bernoulli-lever modes.
#[derive(Debug, Clone)]
pub struct StationaryMode {
    label: String,
    policy: Vec<f64>,
    /// `hypotheses[a]` is the observation law after action `a`.
    hypotheses: Vec<Vec<f64>>,
}

impl StationaryMode {
    pub fn new(label: impl Into<String>, policy: Vec<f64>, hypotheses: Vec<Vec<f64>>) -> Result<Self> {
        validate_distribution(&policy)?;
        if hypotheses.len() != policy.len() {
            return Err(Error::InvalidParameter(
                "one observation law per action is required".into(),
            ));
        }
        let n_obs = hypotheses[0].len();
        for h in &hypotheses {
            if h.len() != n_obs {
                return Err(Error::InvalidParameter(
                    "observation laws must share an alphabet".into(),
                ));
            }
            validate_distribution(h)?;
        }
        Ok(Self {
            label: label.into(),
            policy,
            hypotheses,
        })
    }

    /// Binary observation `1` with probability `biases[a]` after action `a`.
    pub fn bernoulli(label: impl Into<String>, policy: Vec<f64>, biases: &[f64]) -> Result<Self> {
        let hyps = biases.iter().map(|&b| vec![1.0 - b, b]).collect();
        Self::new(label, policy, hyps)
    }
}

impl OperationMode for StationaryMode {
    fn label(&self) -> &str {
        &self.label
    }

    fn n_actions(&self) -> usize {
        self.policy.len()
    }

    fn n_observations(&self) -> usize {
        self.hypotheses[0].len()
    }

    fn policy(&self, _history: &InteractionHistory) -> Vec<f64> {
        self.policy.clone()
    }

    fn hypothesis(&self, _history: &InteractionHistory, action: Action) -> Vec<f64> {
        self.hypotheses[action.0].clone()
    }
}
