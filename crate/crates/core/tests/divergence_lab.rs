mod common;

use std::sync::Arc;

use bayes_control::divergence::{
    convergence_monitor, empirical_boundedness, posterior_floor_monitor, record_run, record_run_in_mode,
    RecordedRun, UNBOUNDED_GROWTH_EXPONENT,
};
use bayes_control::engine::{bcr_act, predictive_action_distribution, ModePosterior, ModeSet};
use bayes_control::experiment::two_mode_bernoulli;
use bayes_control::interaction::{Action, InteractionHistory, ModeEnvironment, OperationMode, StationaryMode};
use bayes_control::seeded_rng;
use bayes_control::util::total_variation;

use common::ModeTables;

fn boxed(m: StationaryMode) -> Box<dyn OperationMode> {
    Box::new(m)
}

fn coin(label: &str, bias: f64) -> Box<dyn OperationMode> {
    boxed(StationaryMode::bernoulli(label, vec![1.0], &[bias]).unwrap())
}

/// A coin whose first toss decides its bias for the rest of time: heads
/// latches a 0.99 coin, tails a 0.6 coin favouring tails.
struct LatchedCoin;

impl OperationMode for LatchedCoin {
    fn label(&self) -> &str {
        "latched"
    }

    fn n_actions(&self) -> usize {
        1
    }

    fn n_observations(&self) -> usize {
        2
    }

    fn policy(&self, _history: &InteractionHistory) -> Vec<f64> {
        vec![1.0]
    }

    fn hypothesis(&self, history: &InteractionHistory, _action: Action) -> Vec<f64> {
        match history.steps().first() {
            None => vec![0.5, 0.5],
            Some((_, o)) if o.0 == 1 => vec![0.01, 0.99],
            Some(_) => vec![0.6, 0.4],
        }
    }
}

fn record_many(modes: &Arc<ModeSet>, truth: usize, runs: u64, steps: usize) -> Vec<RecordedRun> {
    (0..runs)
        .map(|seed| record_run_in_mode(Arc::clone(modes), truth, steps, seed).unwrap())
        .collect()
}

#[test]
fn action_sampling_matches_predictive_law() {
    let mut rng = seeded_rng(1);
    let tables = ModeTables::random(3, 4, 2, &mut rng);
    let modes = tables.mode_set();
    let posterior = ModePosterior::from_log_weights(vec![0.2f64.ln(), 0.5f64.ln(), 0.3f64.ln()]).unwrap();
    let history = InteractionHistory::new();
    let oracle: Vec<f64> = (0..4)
        .map(|a| [0.2, 0.5, 0.3].iter().zip(&tables.policies).map(|(w, p)| w * p[a]).sum())
        .collect();
    let predictive = predictive_action_distribution(&posterior, &modes, &history);
    assert!(total_variation(&predictive, &oracle) < 1e-12);
    let n = 1_000_000;
    let mut counts = [0usize; 4];
    for _ in 0..n {
        counts[bcr_act(&posterior, &modes, &history, &mut rng).unwrap().0 .0] += 1;
    }
    let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    assert!(total_variation(&freq, &oracle) < 0.01);
}

#[test]
fn deterministic_self_target_has_zero_deviation() {
    let modes = Arc::new(
        ModeSet::uniform(vec![
            boxed(StationaryMode::new("sure", vec![1.0], vec![vec![0.0, 1.0]]).unwrap()),
            coin("fair", 0.5),
        ])
        .unwrap(),
    );
    let runs = record_many(&modes, 0, 5, 60);
    let report = empirical_boundedness(&runs, &modes, 0, 20, 0.05, 7).unwrap();
    for entry in report.entries.iter().filter(|e| e.target == 0) {
        assert_eq!(entry.max_deviation, 0.0);
    }
}

#[test]
fn ergodic_coins_are_bounded() {
    let modes = Arc::new(ModeSet::uniform(vec![coin("hi", 0.7), coin("mid", 0.5), coin("lo", 0.3)]).unwrap());
    let runs = record_many(&modes, 0, 40, 800);
    let report = empirical_boundedness(&runs, &modes, 0, 40, 0.05, 11).unwrap();
    assert!(report.all_bounded(), "{report:#?}");
    for entry in &report.entries {
        assert!(entry.bound.is_finite());
        assert!(entry.growth_exponent < UNBOUNDED_GROWTH_EXPONENT);
        // Expected sub-divergences are non-negative.
        assert!(entry.min_mean_z > -3.0, "{entry:?}");
    }
}

#[test]
fn latched_pair_is_unbounded() {
    let modes = Arc::new(ModeSet::uniform(vec![Box::new(LatchedCoin) as Box<dyn OperationMode>, coin("fair", 0.5)]).unwrap());
    let runs = record_many(&modes, 0, 40, 800);
    let report = empirical_boundedness(&runs, &modes, 0, 40, 0.05, 13).unwrap();
    assert!(!report.all_bounded());
    let entry = report.entry(1, 0).unwrap();
    assert!(!entry.bounded);
    assert!(entry.growth_exponent > UNBOUNDED_GROWTH_EXPONENT, "{entry:?}");
}

#[test]
fn floor_holds_when_truth_is_in_class() {
    let modes = Arc::new(two_mode_bernoulli(0.7).unwrap());
    for seed in 0..100 {
        let run = record_run_in_mode(Arc::clone(&modes), 0, 300, seed).unwrap();
        let floor = posterior_floor_monitor(&run.posteriors, 0, 1e-6).unwrap();
        assert!(floor.min > 0.0);
    }
    let single = Arc::new(ModeSet::uniform(vec![coin("only", 0.3)]).unwrap());
    let run = record_run_in_mode(single, 0, 50, 0).unwrap();
    assert_eq!(posterior_floor_monitor(&run.posteriors, 0, 0.5).unwrap().min, 1.0);
}

#[test]
fn floor_breaks_when_truth_is_outside_class() {
    let modes = Arc::new(ModeSet::uniform(vec![coin("hi", 0.7), coin("lo", 0.3)]).unwrap());
    let outside = StationaryMode::bernoulli("fair", vec![1.0], &[0.5]).unwrap();
    let env = ModeEnvironment::new(&outside);
    let run = record_run(modes, &env, 3000, 5, 1).unwrap();
    let floor = posterior_floor_monitor(&run.posteriors, 0, 2e-3).unwrap();
    assert!(floor.violated, "{floor:?}");
}

#[test]
fn reference_only_set_has_zero_tv() {
    let modes = Arc::new(ModeSet::uniform(vec![coin("only", 0.3)]).unwrap());
    let run = record_run_in_mode(Arc::clone(&modes), 0, 100, 1).unwrap();
    let report = convergence_monitor(&run, &modes, 0, 0.05).unwrap();
    assert!(report.tv.iter().all(|&d| d == 0.0));
    assert!(report.converged);
}

#[test]
fn two_coin_set_converges_by_200() {
    let modes = Arc::new(two_mode_bernoulli(0.8).unwrap());
    let settled = (0..100)
        .filter(|&seed| {
            let run = record_run_in_mode(Arc::clone(&modes), 0, 201, seed).unwrap();
            convergence_monitor(&run, &modes, 0, 0.05).unwrap().tv[200] < 0.05
        })
        .count();
    assert!(settled >= 90, "{settled}");
}

#[test]
fn indistinguishable_modes_with_different_policies_do_not_converge() {
    let same = vec![vec![0.4, 0.6], vec![0.4, 0.6]];
    let modes = Arc::new(
        ModeSet::uniform(vec![
            boxed(StationaryMode::new("left", vec![1.0, 0.0], same.clone()).unwrap()),
            boxed(StationaryMode::new("right", vec![0.0, 1.0], same).unwrap()),
        ])
        .unwrap(),
    );
    let run = record_run_in_mode(Arc::clone(&modes), 0, 500, 3).unwrap();
    let report = convergence_monitor(&run, &modes, 0, 0.05).unwrap();
    assert!(!report.converged);
    assert!(report.settled_by(0.05).is_none());
    assert!((report.tail_max - 0.5).abs() < 1e-9);
}
