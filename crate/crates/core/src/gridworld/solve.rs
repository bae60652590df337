//! Exact average-reward solutions of a grid, used to check the map and to
//! score learned policies.

use super::env::transition_law;
use super::map::{Direction, GridMap};
use crate::{Error, Result};

/// Optimal gain, bias and relative Q-values of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AverageRewardSolution {
    pub rho: f64,
    /// Bias per cell. Zero for cells the agent never occupies.
    pub bias: Vec<f64>,
    /// Relative Q-values, `n_cells × 4`, row-major.
    pub q: Vec<f64>,
    /// Greedy action per cell.
    pub policy: Vec<usize>,
}

// Self-loop mixing weight making every policy aperiodic. Gains scale by it.
const TAU: f64 = 0.5;
const MAX_ITERS: usize = 200_000;
const SPAN_TOL: f64 = 1e-11;

type Law = Vec<[Vec<(usize, f64, f64)>; 4]>;

fn laws(map: &GridMap) -> Law {
    (0..map.n_cells())
        .map(|x| {
            if map.reset_cells().contains(&x) {
                Direction::ALL.map(|d| transition_law(map, x, d))
            } else {
                Default::default()
            }
        })
        .collect()
}

fn backup(law: &[(usize, f64, f64)], h: &[f64]) -> f64 {
    law.iter().map(|&(n, p, r)| p * (r + h[n])).sum()
}

/// Relative value iteration, maximizing over actions unless `fixed` is given.
fn iterate(map: &GridMap, law: &Law, fixed: Option<&[usize]>) -> Result<(f64, Vec<f64>)> {
    let cells = map.reset_cells();
    let anchor = cells[0];
    let mut h = vec![0.0; map.n_cells()];
    let mut next = h.clone();
    for _ in 0..MAX_ITERS {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &x in cells {
            let value = match fixed {
                Some(policy) => backup(&law[x][policy[x]], &h),
                None => law[x].iter().map(|l| backup(l, &h)).fold(f64::NEG_INFINITY, f64::max),
            };
            let t = TAU * value + (1.0 - TAU) * h[x];
            lo = lo.min(t - h[x]);
            hi = hi.max(t - h[x]);
            next[x] = t;
        }
        let shift = next[anchor];
        for &x in cells {
            h[x] = next[x] - shift;
        }
        if hi - lo < SPAN_TOL {
            return Ok((0.5 * (lo + hi) / TAU, h.iter().map(|v| v / TAU).collect()));
        }
    }
    Err(Error::InvalidParameter("relative value iteration did not converge".into()))
}

/// Optimal average reward of `map` and a greedy optimal policy.
pub fn solve_average_reward(map: &GridMap) -> Result<AverageRewardSolution> {
    if map.reset_cells().is_empty() {
        return Err(Error::InvalidParameter("map has no cells besides the goal".into()));
    }
    let law = laws(map);
    let (rho, bias) = iterate(map, &law, None)?;
    let mut q = vec![0.0; map.n_cells() * 4];
    let mut policy = vec![0; map.n_cells()];
    for &x in map.reset_cells() {
        let mut best = 0;
        for a in 0..4 {
            q[x * 4 + a] = backup(&law[x][a], &bias) - rho;
            if q[x * 4 + a] > q[x * 4 + best] + 1e-9 {
                best = a;
            }
        }
        policy[x] = best;
    }
    Ok(AverageRewardSolution { rho, bias, q, policy })
}

/// Average reward of the stationary deterministic `policy` (one action index
/// per cell; entries for the goal and walls are ignored).
pub fn evaluate_policy(map: &GridMap, policy: &[usize]) -> Result<f64> {
    if policy.len() != map.n_cells() || policy.iter().any(|&a| a >= 4) {
        return Err(Error::InvalidParameter("policy needs one action in 0..4 per cell".into()));
    }
    if map.reset_cells().is_empty() {
        return Err(Error::InvalidParameter("map has no cells besides the goal".into()));
    }
    iterate(map, &laws(map), Some(policy)).map(|(rho, _)| rho)
}
