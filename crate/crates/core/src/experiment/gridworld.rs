use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::aggregate::{mean_std, AggregateCurve};
use super::config::{ExperimentConfig, ExperimentKind, GridAgentSpec, GridworldSettings};
use super::run_rng;
use crate::gridworld::{
    grid_transition, inverted_cups, parse_grid_map, solve_average_reward, uncertainty_explore_act, rlearning_step,
    BcrMdpAgent, Direction, GridMap, RLearnerState,
};
use crate::{Error, Result};

/// A learner on the grid.
#[derive(Debug, Clone)]
pub enum GridLearner {
    Bcr(BcrMdpAgent),
    RLearning(RLearnerState),
    Random,
}

impl GridLearner {
    pub fn new<R: Rng + ?Sized>(spec: &GridAgentSpec, map: &GridMap, rng: &mut R) -> Result<Self> {
        let (n, k) = (map.n_cells(), map.n_actions());
        Ok(match spec {
            GridAgentSpec::Bcr { priors, sweeps } => GridLearner::Bcr(BcrMdpAgent::new(n, k, *priors, *sweeps, rng)),
            GridAgentSpec::RLearning { params } => GridLearner::RLearning(RLearnerState::new(n, k, *params)?),
            GridAgentSpec::Random => GridLearner::Random,
        })
    }

    /// Chooses an action at `x`; the flag tells whether it was greedy.
    pub fn act<R: Rng + ?Sized>(&mut self, x: usize, rng: &mut R) -> (usize, bool) {
        match self {
            GridLearner::Bcr(agent) => (agent.act(x, rng), true),
            GridLearner::RLearning(state) => uncertainty_explore_act(state, x, rng),
            GridLearner::Random => (rng.random_range(0..4), false),
        }
    }

    pub fn learn<R: Rng + ?Sized>(&mut self, x: usize, a: usize, reward: f64, next: usize, greedy: bool, rng: &mut R) {
        match self {
            GridLearner::Bcr(agent) => agent.observe(x, a, next, reward, rng),
            GridLearner::RLearning(state) => rlearning_step(state, x, a, reward, next, greedy),
            GridLearner::Random => {}
        }
    }
}

/// Average reward over the last window, across runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub agent: String,
    pub mean: f64,
    pub std: f64,
    pub per_run: Vec<f64>,
}

/// Where an agent spends its time in one window, pooled over runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Occupancy {
    pub agent: String,
    /// `"first"` or `"last"`.
    pub window: String,
    /// Fraction of window steps spent in each cell.
    pub visits: Vec<f64>,
    /// Most frequent action per cell, if the cell was visited.
    pub top_action: Vec<Option<usize>>,
}

impl Occupancy {
    /// Text rendering: visit shade per cell and the favourite action.
    pub fn render(&self, map: &GridMap) -> String {
        let peak = self.visits.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut out = String::new();
        for r in 0..map.height() {
            for c in 0..map.width() {
                let x = map.cell(r, c);
                let cell = if x == map.goal() {
                    " G ".to_string()
                } else if !map.is_passable(x) {
                    "###".to_string()
                } else {
                    let shade = [' ', '.', ':', '*', '#'][((self.visits[x] / peak) * 4.0).round() as usize];
                    let arrow = self.top_action[x].map_or(' ', |a| ['^', 'v', '<', '>'][a]);
                    format!("{shade}{arrow}{shade}")
                };
                out.push_str(&cell);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridworldReport {
    pub curves: Vec<AggregateCurve>,
    pub summary: Vec<GridSummary>,
    pub occupancy: Vec<Occupancy>,
    /// Optimal average reward of the map.
    pub optimal_rho: f64,
}

impl GridworldReport {
    pub fn summary_for(&self, agent: &str) -> Option<&GridSummary> {
        self.summary.iter().find(|s| s.agent == agent)
    }
}

/// The configured map, or the bundled one, with the configured parameters.
pub fn load_map(settings: &GridworldSettings) -> Result<GridMap> {
    let map = match &settings.map {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_grid_map(&text)?
        }
        None => inverted_cups(),
    };
    Ok(map.with_params(settings.params)?)
}

struct RunTrace {
    bins: Vec<f64>,
    last_window: f64,
    // [first, last] × cell × action visit counts.
    counts: [Vec<[u64; 4]>; 2],
}

fn run_one(map: &GridMap, spec: &GridAgentSpec, settings: &GridworldSettings, steps: usize, mut rng: crate::SimRng) -> Result<RunTrace> {
    let mut learner = GridLearner::new(spec, map, &mut rng)?;
    let starts = map.reset_cells();
    let mut x = starts[rng.random_range(0..starts.len())];
    let window = settings.window.min(steps);
    let bin = settings.curve_bin;
    let mut bins = Vec::with_capacity(steps / bin + 1);
    let mut counts = [vec![[0u64; 4]; map.n_cells()], vec![[0u64; 4]; map.n_cells()]];
    let (mut bin_sum, mut tail_sum) = (0.0, 0.0);
    for t in 0..steps {
        let (a, greedy) = learner.act(x, &mut rng);
        let dir = Direction::from_index(a).expect("four actions");
        let step = grid_transition(map, x, dir, &mut rng);
        learner.learn(x, a, step.reward, step.next, greedy, &mut rng);
        if t < window {
            counts[0][x][a] += 1;
        }
        if t >= steps - window {
            counts[1][x][a] += 1;
            tail_sum += step.reward;
        }
        bin_sum += step.reward;
        if (t + 1) % bin == 0 || t + 1 == steps {
            let width = (t % bin) + 1;
            bins.push(bin_sum / width as f64);
            bin_sum = 0.0;
        }
        x = step.next;
    }
    Ok(RunTrace {
        bins,
        last_window: tail_sum / window as f64,
        counts,
    })
}

/// Runs every agent for `runs × steps` on the configured map. Curves hold the
/// mean reward per `curve_bin` steps; the summary covers the last `window`
/// steps, and occupancy the first and last `window` steps.
pub fn run_gridworld_experiment(config: &ExperimentConfig) -> Result<GridworldReport> {
    config.validate()?;
    let ExperimentKind::Gridworld(settings) = &config.kind else {
        return Err(Error::InvalidParameter("not a gridworld config".into()));
    };
    let map = load_map(settings)?;
    let steps = config.steps;
    let jobs: Vec<(usize, usize)> = (0..config.runs)
        .flat_map(|r| (0..settings.agents.len()).map(move |j| (r, j)))
        .collect();
    let traces = jobs
        .par_iter()
        .map(|&(run, j)| {
            run_one(&map, &settings.agents[j], settings, steps, run_rng(config.base_seed, run, j as u64 + 1))
        })
        .collect::<Result<Vec<_>>>()?;

    let bin = settings.curve_bin;
    let t: Vec<usize> = (1..=steps.div_ceil(bin)).map(|i| (i * bin).min(steps)).collect();
    let mut curves = Vec::new();
    let mut summary = Vec::new();
    let mut occupancy = Vec::new();
    for (j, spec) in settings.agents.iter().enumerate() {
        let name = spec.name();
        let mine: Vec<&RunTrace> = traces.iter().skip(j).step_by(settings.agents.len()).collect();
        let bins: Vec<Vec<f64>> = mine.iter().map(|r| r.bins.clone()).collect();
        curves.push(AggregateCurve::from_runs(&name, "reward_rate", t.clone(), &bins)?);
        let per_run: Vec<f64> = mine.iter().map(|r| r.last_window).collect();
        let (mean, std) = mean_std(&per_run);
        summary.push(GridSummary {
            agent: name.clone(),
            mean,
            std,
            per_run,
        });
        for (w, label) in ["first", "last"].iter().enumerate() {
            let mut pooled = vec![[0u64; 4]; map.n_cells()];
            for r in &mine {
                for (p, c) in pooled.iter_mut().zip(&r.counts[w]) {
                    for a in 0..4 {
                        p[a] += c[a];
                    }
                }
            }
            let total: u64 = pooled.iter().flatten().sum();
            occupancy.push(Occupancy {
                agent: name.clone(),
                window: label.to_string(),
                visits: pooled.iter().map(|c| c.iter().sum::<u64>() as f64 / total.max(1) as f64).collect(),
                top_action: pooled
                    .iter()
                    .map(|c| {
                        let best = (0..4).max_by_key(|&a| (c[a], std::cmp::Reverse(a))).unwrap_or(0);
                        (c[best] > 0).then_some(best)
                    })
                    .collect(),
            });
        }
    }
    Ok(GridworldReport {
        curves,
        summary,
        occupancy,
        optimal_rho: solve_average_reward(&map)?.rho,
    })
}
