use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::aggregate::AggregateCurve;
use super::config::{ExperimentConfig, ExperimentKind};
use crate::divergence::{convergence_monitor, posterior_floor_monitor, record_run_in_mode};
use crate::engine::ModeSet;
use crate::interaction::{OperationMode, StationaryMode};
use crate::{Error, Result};

/// Two levers; mode 0 believes lever 0 pays with `bias` and lever 1 with
/// `1 − bias` and always pulls lever 0; mode 1 is the mirror image.
pub fn two_mode_bernoulli(bias: f64) -> Result<ModeSet> {
    let a = StationaryMode::new(
        "lever0",
        vec![1.0, 0.0],
        vec![vec![1.0 - bias, bias], vec![bias, 1.0 - bias]],
    )?;
    let b = StationaryMode::new(
        "lever1",
        vec![0.0, 1.0],
        vec![vec![bias, 1.0 - bias], vec![1.0 - bias, bias]],
    )?;
    ModeSet::uniform(vec![Box::new(a) as Box<dyn OperationMode>, Box::new(b)])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergeReport {
    /// Mean posterior of the true mode and mean TV distance, for
    /// `t = 0..=steps` observations.
    pub curves: Vec<AggregateCurve>,
    pub runs: usize,
    /// Fraction of runs whose TV after `steps` observations is below `tol`.
    pub settled_fraction: f64,
    /// Smallest posterior of the true mode after `floor_after` observations.
    pub min_posterior_after: f64,
    pub floor_violations: usize,
}

/// Runs the control rule in a world generated by mode 0 and tracks how fast
/// its predictive action law approaches mode 0's policy.
pub fn run_convergence_experiment(config: &ExperimentConfig) -> Result<ConvergeReport> {
    config.validate()?;
    let ExperimentKind::Converge(settings) = &config.kind else {
        return Err(Error::InvalidParameter("not a converge config".into()));
    };
    let modes = Arc::new(two_mode_bernoulli(settings.bias)?);
    let horizon = config.steps;
    // One extra step so the law after `steps` observations is recorded.
    let per_run = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let seed = config.base_seed.wrapping_add(run as u64);
            let rec = record_run_in_mode(Arc::clone(&modes), 0, horizon + 1, seed)?;
            let report = convergence_monitor(&rec, &modes, 0, settings.tol)?;
            let posterior: Vec<f64> = rec.posteriors[..=horizon].iter().map(|p| p[0]).collect();
            let lambda = settings.floor * modes.len() as f64;
            let floor = posterior_floor_monitor(&rec.posteriors[settings.floor_after.min(horizon)..=horizon], 0, lambda)?;
            Ok((posterior, report.tv, floor))
        })
        .collect::<Result<Vec<_>>>()?;

    let t: Vec<usize> = (0..=horizon).collect();
    let post: Vec<Vec<f64>> = per_run.iter().map(|r| r.0.clone()).collect();
    let tv: Vec<Vec<f64>> = per_run.iter().map(|r| r.1.clone()).collect();
    let settled = per_run.iter().filter(|r| r.1[horizon] < settings.tol).count();
    Ok(ConvergeReport {
        curves: vec![
            AggregateCurve::from_runs("bcr", "posterior_m_star", t.clone(), &post)?,
            AggregateCurve::from_runs("bcr", "tv", t, &tv)?,
        ],
        runs: config.runs,
        settled_fraction: settled as f64 / config.runs as f64,
        min_posterior_after: per_run.iter().map(|r| r.2.min).fold(f64::INFINITY, f64::min),
        floor_violations: per_run.iter().filter(|r| r.2.violated).count(),
    })
}
