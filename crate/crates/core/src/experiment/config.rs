use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bandit::BetaPrior;
use crate::gridworld::{GridParams, HyperPriors, RLearningParams, RhoUpdate};
use crate::{Error, Result};

/// A complete experiment description, stored as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub runs: usize,
    pub steps: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Output directory for CSV, SVG and summary files.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(flatten)]
    pub kind: ExperimentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentKind {
    Bandit(BanditSettings),
    Gridworld(GridworldSettings),
    ExpGap(ExpGapSettings),
    Converge(ConvergeSettings),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditSettings {
    pub levers: usize,
    pub agents: Vec<BanditAgentSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BanditAgentSpec {
    Bcr {
        #[serde(default)]
        prior: BetaPrior,
    },
    EpsilonGreedy {
        epsilon: f64,
        decay: f64,
    },
    Gittins {
        horizon: usize,
        discount: f64,
        tolerance: f64,
        /// Directory holding cached index tables.
        #[serde(default)]
        cache_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridworldSettings {
    /// Map file; the bundled map when absent.
    #[serde(default)]
    pub map: Option<PathBuf>,
    #[serde(default)]
    pub params: GridParams,
    pub agents: Vec<GridAgentSpec>,
    /// Steps in the summary and occupancy windows.
    pub window: usize,
    /// Steps per point of the learning curves.
    pub curve_bin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GridAgentSpec {
    Bcr {
        #[serde(default)]
        priors: HyperPriors,
        #[serde(default = "one")]
        sweeps: usize,
    },
    RLearning {
        #[serde(flatten)]
        params: RLearningParams,
    },
    Random,
}

fn one() -> usize {
    1
}

impl GridAgentSpec {
    pub fn name(&self) -> String {
        match self {
            GridAgentSpec::Bcr { .. } => "bcr".into(),
            GridAgentSpec::RLearning { params } => format!("r_learning_c{}", params.c),
            GridAgentSpec::Random => "random".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpGapSettings {
    /// Chain lengths to test. `steps` caps each run.
    pub ks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergeSettings {
    /// Bias of the favoured lever in each mode; the other lever gets `1 − b`.
    pub bias: f64,
    /// TV tolerance for convergence.
    pub tol: f64,
    /// Posterior floor checked after `floor_after` steps.
    pub floor: f64,
    pub floor_after: usize,
}

/// Probability with which R-learning takes the bonus-maximizing action.
pub const DEFAULT_P_EXP: f64 = 0.05;

pub fn default_r_learning(c: f64) -> GridAgentSpec {
    GridAgentSpec::RLearning {
        params: RLearningParams {
            alpha: 0.5,
            beta: 0.001,
            c,
            p_exp: DEFAULT_P_EXP,
            rho_update: RhoUpdate::Always,
        },
    }
}

impl ExperimentConfig {
    /// Ten levers, 200 runs × 1,000 steps, all three agents.
    pub fn bandit_default() -> Self {
        Self {
            runs: 200,
            steps: 1000,
            base_seed: 0,
            out: None,
            kind: ExperimentKind::Bandit(BanditSettings {
                levers: 10,
                agents: vec![
                    BanditAgentSpec::Bcr { prior: BetaPrior::default() },
                    BanditAgentSpec::EpsilonGreedy { epsilon: 0.1, decay: 0.99 },
                    BanditAgentSpec::Gittins {
                        horizon: 1300,
                        discount: 0.999,
                        tolerance: 1e-4,
                        cache_dir: None,
                    },
                ],
            }),
        }
    }

    /// Bundled map, 10 runs × 300,000 steps, the control rule against
    /// R-learning with C ∈ {5, 30, 200}.
    pub fn gridworld_default() -> Self {
        Self {
            runs: 10,
            steps: 300_000,
            base_seed: 0,
            out: None,
            kind: ExperimentKind::Gridworld(GridworldSettings {
                map: None,
                params: GridParams::default(),
                agents: vec![
                    GridAgentSpec::Bcr {
                        priors: HyperPriors::default(),
                        sweeps: 1,
                    },
                    default_r_learning(5.0),
                    default_r_learning(30.0),
                    default_r_learning(200.0),
                ],
                window: 5000,
                curve_bin: 5000,
            }),
        }
    }

    /// 200 runs per chain length, capped at 100,000 steps.
    pub fn exp_gap_default() -> Self {
        Self {
            runs: 200,
            steps: 100_000,
            base_seed: 0,
            out: None,
            kind: ExperimentKind::ExpGap(ExpGapSettings { ks: vec![2, 4, 6, 8] }),
        }
    }

    /// 100 runs × 500 steps of the two-mode Bernoulli problem.
    pub fn converge_default() -> Self {
        Self {
            runs: 100,
            steps: 500,
            base_seed: 0,
            out: None,
            kind: ExperimentKind::Converge(ConvergeSettings {
                bias: 0.8,
                tol: 0.05,
                floor: 1e-3,
                floor_after: 50,
            }),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ExperimentKind::Bandit(_) => "bandit",
            ExperimentKind::Gridworld(_) => "gridworld",
            ExperimentKind::ExpGap(_) => "exp_gap",
            ExperimentKind::Converge(_) => "converge",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.runs == 0 || self.steps == 0 {
            return bad(format!("runs ({}) and steps ({}) must be positive", self.runs, self.steps));
        }
        match &self.kind {
            ExperimentKind::Bandit(b) => {
                if b.levers == 0 || b.agents.is_empty() {
                    return bad("bandit needs at least one lever and one agent".into());
                }
            }
            ExperimentKind::Gridworld(g) => {
                if g.agents.is_empty() || g.window == 0 || g.curve_bin == 0 {
                    return bad("gridworld needs agents and positive window/curve_bin".into());
                }
                for agent in &g.agents {
                    if let GridAgentSpec::RLearning { params } = agent {
                        params.validate()?;
                    }
                }
            }
            ExperimentKind::ExpGap(e) => {
                if e.ks.is_empty() || e.ks.iter().any(|&k| k < 2) {
                    return bad("exp_gap needs chain lengths k >= 2".into());
                }
            }
            ExperimentKind::Converge(c) => {
                if !(c.bias > 0.5 && c.bias < 1.0) || !(c.tol > 0.0) {
                    return bad("converge needs bias in (0.5, 1) and tol > 0".into());
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
