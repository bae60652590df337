use rand::Rng;

use super::map::{Direction, GridMap};
use crate::interaction::{Action, Environment, InteractionHistory, Observation};
use crate::{Error, Result};

/// What a transition earned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardTag {
    Default = 0,
    Membrane = 1,
    Goal = 2,
}

/// Outcome of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridStep {
    /// Cell the move ended in (possibly the goal).
    pub landed: usize,
    /// Cell the agent starts the next step from: `landed`, or a uniformly
    /// drawn restart cell after reaching the goal.
    pub next: usize,
    pub reward: f64,
    pub tag: RewardTag,
}

impl GridStep {
    pub fn reached_goal(&self) -> bool {
        self.tag == RewardTag::Goal
    }
}

fn reward_for(map: &GridMap, landed: usize, crossed: bool) -> (f64, RewardTag) {
    let p = map.params();
    if landed == map.goal() {
        (p.goal_reward, RewardTag::Goal)
    } else if crossed {
        (p.membrane_reward, RewardTag::Membrane)
    } else {
        (p.default_reward, RewardTag::Default)
    }
}

/// Samples one move from passable cell `x` with intended direction `a`.
///
/// With probability `p` the intended move is attempted; otherwise a uniformly
/// chosen passable neighbour's direction is attempted instead. Blocked moves
/// leave the agent in place.
pub fn grid_transition<R: Rng + ?Sized>(map: &GridMap, x: usize, a: Direction, rng: &mut R) -> GridStep {
    let dir = if rng.random::<f64>() < map.params().success_prob {
        Some(a)
    } else {
        let free = map.free_neighbors(x);
        if free.is_empty() {
            None
        } else {
            Some(free[rng.random_range(0..free.len())].0)
        }
    };
    let (landed, crossed) = match dir {
        Some(d) => map.attempt(x, d),
        None => (x, false),
    };
    let (reward, tag) = reward_for(map, landed, crossed);
    let next = if tag == RewardTag::Goal && !map.reset_cells().is_empty() {
        map.reset_cells()[rng.random_range(0..map.reset_cells().len())]
    } else {
        landed
    };
    GridStep {
        landed,
        next,
        reward,
        tag,
    }
}

/// Exact law of [`grid_transition`] as `(next, probability, reward)` entries,
/// merged by `(next, reward)`.
pub fn transition_law(map: &GridMap, x: usize, a: Direction) -> Vec<(usize, f64, f64)> {
    let p = map.params().success_prob;
    let free = map.free_neighbors(x);
    let mut attempts: Vec<(Option<Direction>, f64)> = vec![(Some(a), p)];
    if free.is_empty() {
        attempts.push((None, 1.0 - p));
    } else {
        let share = (1.0 - p) / free.len() as f64;
        attempts.extend(free.iter().map(|&(d, _)| (Some(d), share)));
    }
    let mut law: Vec<(usize, f64, f64)> = Vec::new();
    let mut add = |next: usize, prob: f64, reward: f64| {
        if prob == 0.0 {
            return;
        }
        match law.iter_mut().find(|e| e.0 == next && e.2 == reward) {
            Some(e) => e.1 += prob,
            None => law.push((next, prob, reward)),
        }
    };
    for (dir, prob) in attempts {
        let (landed, crossed) = dir.map_or((x, false), |d| map.attempt(x, d));
        let (reward, tag) = reward_for(map, landed, crossed);
        if tag == RewardTag::Goal && !map.reset_cells().is_empty() {
            let share = prob / map.reset_cells().len() as f64;
            for &c in map.reset_cells() {
                add(c, share, reward);
            }
        } else {
            add(landed, prob, reward);
        }
    }
    law
}

/// Observation index for the interaction-history view: next cell and reward
/// tag. The exact reward travels on the side channel.
pub fn encode_observation(next: usize, tag: RewardTag) -> Observation {
    Observation(next * 3 + tag as usize)
}

pub fn decode_observation(o: Observation) -> (usize, RewardTag) {
    let tag = match o.0 % 3 {
        0 => RewardTag::Default,
        1 => RewardTag::Membrane,
        _ => RewardTag::Goal,
    };
    (o.0 / 3, tag)
}

/// The grid as an [`Environment`] over encoded observations. The current
/// cell is recovered from the last observation (or `start`).
pub struct GridEnvironment<'a> {
    map: &'a GridMap,
    start: usize,
}

impl<'a> GridEnvironment<'a> {
    pub fn new(map: &'a GridMap, start: usize) -> Result<Self> {
        if start >= map.n_cells() || !map.is_passable(start) || start == map.goal() {
            return Err(Error::InvalidParameter(format!("start cell {start} is not a restart cell")));
        }
        Ok(Self { map, start })
    }

    pub fn current(&self, history: &InteractionHistory) -> usize {
        history.last().map_or(self.start, |(_, o)| decode_observation(o).0)
    }
}

impl Environment for GridEnvironment<'_> {
    fn respond<R: Rng + ?Sized>(
        &self,
        history: &InteractionHistory,
        action: Action,
        rng: &mut R,
    ) -> Result<(Observation, f64)> {
        let dir = Direction::from_index(action.0).ok_or(Error::OutOfAlphabet {
            index: action.0,
            size: 4,
        })?;
        let step = grid_transition(self.map, self.current(history), dir, rng);
        Ok((encode_observation(step.next, step.tag), step.reward))
    }
}
