//! Divergence processes and empirical convergence diagnostics over recorded
//! runs of the control rule.
//!
//! For a reference mode `m*` and a target `m`, the divergence process is the
//! running log-likelihood ratio of the realized observations,
//! `d_t(m*‖m) = Σ_τ ln P(o_τ|m*,·) − ln P(o_τ|m,·)`. Splitting the time steps
//! by the mode whose policy produced each action partitions `d_t` into
//! sub-divergences.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use rand::Rng;

use crate::engine::{predictive_action_distribution, BcrAgent, ModePosterior, ModeSet};
use crate::interaction::{
    Action, Agent, Environment, InteractionHistory, ModeEnvironment, Observation,
};
use crate::util::{sample_unchecked, total_variation};
use crate::{seeded_rng, Error, Result};

/// A control-rule run with everything the diagnostics need.
#[derive(Debug, Clone)]
pub struct RecordedRun {
    pub history: InteractionHistory,
    /// Mode whose policy generated each action.
    pub acting_modes: Vec<usize>,
    /// Posterior probabilities before each step, plus the final posterior
    /// (`history.len() + 1` entries).
    pub posteriors: Vec<Vec<f64>>,
}

/// Runs the control rule against `environment` for `t_max` steps and keeps the
/// full record.
pub fn record_run<E: Environment>(
    modes: Arc<ModeSet>,
    environment: &E,
    t_max: usize,
    seed: u64,
    hold: usize,
) -> Result<RecordedRun> {
    let mut agent = BcrAgent::new(modes).with_hold(hold).recording();
    let mut rng = seeded_rng(seed);
    let mut history = InteractionHistory::new();
    for _ in 0..t_max {
        let action = agent.act(&history, &mut rng)?;
        let (observation, _) = environment.respond(&history, action, &mut rng)?;
        agent.observe(&history, action, observation)?;
        history.push_step(action, observation)?;
    }
    Ok(RecordedRun {
        history,
        acting_modes: agent.acting_modes().to_vec(),
        posteriors: agent.posterior_log().map(<[_]>::to_vec).unwrap_or_default(),
    })
}

/// Runs the control rule in a world generated by mode `true_mode`.
pub fn record_run_in_mode(
    modes: Arc<ModeSet>,
    true_mode: usize,
    t_max: usize,
    seed: u64,
) -> Result<RecordedRun> {
    modes.check_index(true_mode)?;
    let env_modes = Arc::clone(&modes);
    let env = ModeEnvironment::new(env_modes.mode(true_mode));
    record_run(modes, &env, t_max, seed, 1)
}

/// Per-step log-likelihood ratios of `target` against `reference`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTrace {
    pub reference: usize,
    pub target: usize,
    pub increments: Vec<f64>,
    pub acting_mode: Vec<usize>,
    /// Steps whose increment is not finite (an observation impossible under
    /// one of the two modes).
    pub non_finite_steps: Vec<usize>,
}

impl DivergenceTrace {
    /// `d_1, ..., d_T`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.increments
            .iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        self.increments.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }
}

fn ln_ratio(p_ref: f64, p_target: f64) -> f64 {
    let lr = |p: f64| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY };
    let (a, b) = (lr(p_ref), lr(p_target));
    if a == b {
        // Both impossible or equal: no evidence either way.
        0.0
    } else {
        a - b
    }
}

/// Builds `d_t(m*‖m)` over `history`.
pub fn build_divergence_trace(
    history: &InteractionHistory,
    modes: &ModeSet,
    m_star: usize,
    m: usize,
    acting_modes: &[usize],
) -> Result<DivergenceTrace> {
    modes.check_index(m_star)?;
    modes.check_index(m)?;
    if acting_modes.len() != history.len() {
        return Err(Error::InvalidParameter(format!(
            "{} acting modes for a history of {} steps",
            acting_modes.len(),
            history.len()
        )));
    }
    if let Some(&bad) = acting_modes.iter().find(|&&i| i >= modes.len()) {
        modes.check_index(bad)?;
    }
    let (reference, target) = (modes.mode(m_star), modes.mode(m));
    let mut prefix = InteractionHistory::new();
    let mut increments = Vec::with_capacity(history.len());
    let mut non_finite_steps = Vec::new();
    for (tau, &(a, o)) in history.steps().iter().enumerate() {
        let inc = ln_ratio(
            reference.hypothesis(&prefix, a)[o.0],
            target.hypothesis(&prefix, a)[o.0],
        );
        if !inc.is_finite() {
            non_finite_steps.push(tau);
        }
        increments.push(inc);
        prefix.push_step(a, o)?;
    }
    Ok(DivergenceTrace {
        reference: m_star,
        target: m,
        increments,
        acting_mode: acting_modes.to_vec(),
        non_finite_steps,
    })
}

/// Sums the increments separately over the steps acted by each mode.
pub fn decompose_subdivergences(trace: &DivergenceTrace) -> BTreeMap<usize, f64> {
    let mut parts = BTreeMap::new();
    for (&mode, &inc) in trace.acting_mode.iter().zip(&trace.increments) {
        *parts.entry(mode).or_insert(0.0) += inc;
    }
    parts
}

/// `ln[P(m)/P(m*)] − d_t(m*‖m)` for `t = 0..=T`: the log of the upper bound on
/// the posterior of the trace's target mode.
pub fn log_posterior_upper_bound(trace: &DivergenceTrace, prior: &[f64]) -> Vec<f64> {
    let offset = prior[trace.target].ln() - prior[trace.reference].ln();
    std::iter::once(offset)
        .chain(trace.partial_sums().into_iter().map(|d| offset - d))
        .collect()
}

/// Deviation of a realized sub-divergence from its Monte-Carlo mean, for one
/// (target, acting policy) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessEntry {
    pub target: usize,
    pub policy: usize,
    pub checkpoints: Vec<usize>,
    /// `(1 − δ)`-quantile across runs of `|g − Ĝ|` at each checkpoint.
    pub deviation_quantile: Vec<f64>,
    /// Largest `|g − Ĝ|` seen on any run and checkpoint.
    pub max_deviation: f64,
    /// Largest Monte-Carlo standard error of any `Ĝ`.
    pub max_std_error: f64,
    /// Smallest `Ĝ / se(Ĝ)`; expected means are non-negative, so this stays
    /// above about −3.
    pub min_mean_z: f64,
    /// Log-log slope of the deviation quantile against `t`.
    pub growth_exponent: f64,
    /// Estimated constant `C`: the largest deviation quantile.
    pub bound: f64,
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundednessReport {
    pub reference: usize,
    pub delta: f64,
    pub samples: usize,
    pub runs: usize,
    /// Whether enough runs were supplied for the `(1 − δ)` quantile to be
    /// resolved; otherwise the quantile is the maximum.
    pub quantile_resolved: bool,
    pub entries: Vec<BoundednessEntry>,
}

impl BoundednessReport {
    pub fn all_bounded(&self) -> bool {
        self.entries.iter().all(|e| e.bounded)
    }

    pub fn entry(&self, target: usize, policy: usize) -> Option<&BoundednessEntry> {
        self.entries
            .iter()
            .find(|e| e.target == target && e.policy == policy)
    }
}

/// Growth exponents above this are reported as unbounded. Bounded processes
/// built from i.i.d. increments fluctuate on a `sqrt(t)` scale.
pub const UNBOUNDED_GROWTH_EXPONENT: f64 = 0.75;

/// Estimates, for each target mode and each acting policy, how far realized
/// sub-divergences stray from their means.
///
/// The mean `Ĝ(m';𝒯)` is estimated by replaying each run: steps outside `𝒯`
/// keep their recorded symbols, steps in `𝒯` draw the action from `m'`'s
/// policy and the observation from `m*`'s hypothesis.
pub fn empirical_boundedness(
    runs: &[RecordedRun],
    modes: &ModeSet,
    m_star: usize,
    n_monte_carlo: usize,
    delta: f64,
    seed: u64,
) -> Result<BoundednessReport> {
    modes.check_index(m_star)?;
    if runs.is_empty() {
        return Err(Error::InsufficientSamples("no recorded runs".into()));
    }
    if n_monte_carlo < 2 {
        return Err(Error::InsufficientSamples(format!(
            "{n_monte_carlo} replays cannot estimate a standard error"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("confidence level {delta} outside (0, 1)")));
    }
    let horizon = runs.iter().map(|r| r.history.len()).min().unwrap_or(0);
    if horizon == 0 {
        return Err(Error::InsufficientSamples("runs have no steps".into()));
    }
    let checkpoints = checkpoints(horizon);
    let mut rng = seeded_rng(seed);
    let mut entries = Vec::new();

    for target in 0..modes.len() {
        for policy in 0..modes.len() {
            let mut per_checkpoint: Vec<Vec<f64>> = vec![Vec::new(); checkpoints.len()];
            let mut max_std_error: f64 = 0.0;
            let mut min_mean_z = f64::INFINITY;
            let mut used = false;
            for run in runs {
                let trace = build_divergence_trace(&run.history, modes, m_star, target, &run.acting_modes)?;
                let in_set: Vec<bool> = run.acting_modes.iter().map(|&a| a == policy).collect();
                if !in_set[..horizon].iter().any(|&b| b) {
                    continue;
                }
                used = true;
                let realized = prefix_sums_over(&trace.increments, &in_set, &checkpoints);
                let replays: Vec<Vec<f64>> = (0..n_monte_carlo)
                    .map(|_| replay(run, modes, m_star, target, policy, &in_set, &checkpoints, &mut rng))
                    .collect();
                for (c, g) in realized.iter().enumerate() {
                    let xs: Vec<f64> = replays.iter().map(|r| r[c]).collect();
                    let (mean, se) = mean_and_se(&xs);
                    max_std_error = max_std_error.max(se);
                    let z = if se > 0.0 {
                        mean / se
                    } else if mean >= 0.0 {
                        f64::INFINITY
                    } else {
                        f64::NEG_INFINITY
                    };
                    min_mean_z = min_mean_z.min(z);
                    let dev = if g.is_finite() && mean.is_finite() {
                        (g - mean).abs()
                    } else if g == &mean {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    per_checkpoint[c].push(dev);
                }
            }
            if !used {
                continue;
            }
            let deviation_quantile: Vec<f64> =
                per_checkpoint.iter().map(|d| upper_quantile(d, 1.0 - delta)).collect();
            let max_deviation = per_checkpoint
                .iter()
                .flatten()
                .copied()
                .fold(0.0, f64::max);
            let growth_exponent = log_log_slope(&checkpoints, &deviation_quantile);
            let bound = deviation_quantile.iter().copied().fold(0.0, f64::max);
            entries.push(BoundednessEntry {
                target,
                policy,
                checkpoints: checkpoints.clone(),
                deviation_quantile,
                max_deviation,
                max_std_error,
                min_mean_z,
                growth_exponent,
                bound,
                bounded: bound.is_finite() && growth_exponent <= UNBOUNDED_GROWTH_EXPONENT,
            });
        }
    }
    Ok(BoundednessReport {
        reference: m_star,
        delta,
        samples: n_monte_carlo,
        runs: runs.len(),
        quantile_resolved: (runs.len() as f64) * delta >= 1.0,
        entries,
    })
}

/// Geometric checkpoints `..., T/4, T/2, T`, ascending, at least 8 apart from
/// the origin where possible.
fn checkpoints(horizon: usize) -> Vec<usize> {
    let mut cps = vec![horizon];
    let mut t = horizon / 2;
    while t >= 8 {
        cps.push(t);
        t /= 2;
    }
    cps.reverse();
    cps
}

fn prefix_sums_over(increments: &[f64], in_set: &[bool], checkpoints: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = 0.0;
    let mut next = 0;
    for (tau, (&inc, &member)) in increments.iter().zip(in_set).enumerate() {
        if member {
            acc += inc;
        }
        while next < checkpoints.len() && checkpoints[next] == tau + 1 {
            out.push(acc);
            next += 1;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn replay<R: Rng + ?Sized>(
    run: &RecordedRun,
    modes: &ModeSet,
    m_star: usize,
    target: usize,
    policy: usize,
    in_set: &[bool],
    checkpoints: &[usize],
    rng: &mut R,
) -> Vec<f64> {
    let horizon = *checkpoints.last().unwrap();
    let (reference, tgt, pol) = (modes.mode(m_star), modes.mode(target), modes.mode(policy));
    let mut hist = InteractionHistory::new();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut acc = 0.0;
    let mut next = 0;
    for (tau, &(a0, o0)) in run.history.steps()[..horizon].iter().enumerate() {
        let (a, o) = if in_set[tau] {
            let a = Action(sample_unchecked(&pol.policy(&hist), rng));
            let h_ref = reference.hypothesis(&hist, a);
            let o = sample_unchecked(&h_ref, rng);
            acc += ln_ratio(h_ref[o], tgt.hypothesis(&hist, a)[o]);
            (a, Observation(o))
        } else {
            (a0, o0)
        };
        hist.push_step(a, o).expect("replay history alternates");
        while next < checkpoints.len() && checkpoints[next] == tau + 1 {
            out.push(acc);
            next += 1;
        }
    }
    out
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if !mean.is_finite() {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical `level`-quantile (order statistic `ceil(level·n)`), which is the
/// maximum when there are too few values.
fn upper_quantile(values: &[f64], level: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = ((level * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}

fn log_log_slope(ts: &[usize], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = ts
        .iter()
        .zip(ys)
        .filter(|(_, y)| **y > 0.0 && y.is_finite())
        .map(|(t, y)| ((*t as f64).ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return if ys.iter().any(|y| y.is_infinite()) {
            f64::INFINITY
        } else {
            0.0
        };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Lowest posterior of the reference mode over a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorFloor {
    pub min: f64,
    /// Position in the series where the minimum occurred.
    pub at: usize,
    /// `λ / |M|`.
    pub threshold: f64,
    pub violated: bool,
}

/// Tracks `min_t P(m* | history_t)` against the floor `λ / |M|`.
pub fn posterior_floor_monitor(
    posterior_series: &[Vec<f64>],
    m_star: usize,
    lambda: f64,
) -> Result<PosteriorFloor> {
    let first = posterior_series
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty posterior series".into()))?;
    if m_star >= first.len() {
        return Err(Error::ModeIndex {
            index: m_star,
            len: first.len(),
        });
    }
    let (at, min) = posterior_series
        .iter()
        .map(|p| p[m_star])
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, p)| if p < best.1 { (i, p) } else { best });
    let threshold = lambda / first.len() as f64;
    Ok(PosteriorFloor {
        min,
        at,
        threshold,
        violated: min < threshold,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// TV distance between the predictive action law and `m*`'s policy before
    /// each step.
    pub tv: Vec<f64>,
    /// Largest TV over the final tenth of the run.
    pub tail_max: f64,
    pub converged: bool,
}

impl ConvergenceReport {
    /// First step from which the TV stays below `tol`, if any.
    pub fn settled_by(&self, tol: f64) -> Option<usize> {
        let last_bad = self.tv.iter().rposition(|&d| d >= tol);
        match last_bad {
            None => Some(0),
            Some(i) if i + 1 < self.tv.len() => Some(i + 1),
            Some(_) => None,
        }
    }
}

/// Per-step TV between the control rule's predictive action law and the
/// reference mode's policy. The run counts as converged when the final tenth
/// stays below `tol`.
pub fn convergence_monitor(
    run: &RecordedRun,
    modes: &ModeSet,
    m_star: usize,
    tol: f64,
) -> Result<ConvergenceReport> {
    modes.check_index(m_star)?;
    if run.posteriors.len() < run.history.len() {
        return Err(Error::InvalidParameter(
            "run was recorded without per-step posteriors".into(),
        ));
    }
    let reference = modes.mode(m_star);
    let mut prefix = InteractionHistory::new();
    let mut tv = Vec::with_capacity(run.history.len());
    for (t, &(a, o)) in run.history.steps().iter().enumerate() {
        let posterior = ModePosterior::from_log_weights(run.posteriors[t].iter().map(|p| p.ln()).collect())?;
        let mix = predictive_action_distribution(&posterior, modes, &prefix);
        tv.push(total_variation(&mix, &reference.policy(&prefix)).clamp(0.0, 1.0));
        prefix.push_step(a, o)?;
    }
    let tail_start = tv.len() - tv.len() / 10;
    let tail_max = tv[tail_start.min(tv.len().saturating_sub(1))..]
        .iter()
        .copied()
        .fold(0.0, f64::max);
    Ok(ConvergenceReport {
        converged: !tv.is_empty() && tail_max < tol,
        tv,
        tail_max,
    })
}

/// Writes the per-step diagnostic table
/// `t, d_t, g_<mode>..., posterior_m_star, tv` for one target mode.
pub fn write_diagnostics_csv(
    path: &Path,
    run: &RecordedRun,
    modes: &ModeSet,
    m_star: usize,
    target: usize,
) -> Result<()> {
    let trace = build_divergence_trace(&run.history, modes, m_star, target, &run.acting_modes)?;
    let report = convergence_monitor(run, modes, m_star, 0.05)?;
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string(), "d_t".to_string()];
    header.extend((0..modes.len()).map(|m| format!("g_{}", modes.mode(m).label())));
    header.extend(["posterior_m_star".to_string(), "tv".to_string()]);
    w.write_record(&header)?;
    let mut parts = vec![0.0; modes.len()];
    let mut d = 0.0;
    for t in 0..trace.len() {
        d += trace.increments[t];
        parts[trace.acting_mode[t]] += trace.increments[t];
        let mut row = vec![(t + 1).to_string(), d.to_string()];
        row.extend(parts.iter().map(|g| g.to_string()));
        row.push(run.posteriors[t + 1][m_star].to_string());
        row.push(report.tv[t].to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}
