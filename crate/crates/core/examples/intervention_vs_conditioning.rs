//! Two modes that agree about every observation but act differently. The
//! control rule treats its own actions as interventions and keeps the prior;
//! the naive mixture conditions on them and talks itself into the mode that
//! happens to be acting.
//!
//! `cargo run --example intervention_vs_conditioning`

use std::sync::Arc;

use bayes_control::engine::{bcr_observe, naive_update, Evidence, ModePosterior, ModeSet};
use bayes_control::interaction::{Action, InteractionHistory, Observation, OperationMode, StationaryMode};
use bayes_control::seeded_rng;
use bayes_control::util::sample_categorical;

fn main() -> bayes_control::Result<()> {
    let shared = vec![vec![0.3, 0.7], vec![0.6, 0.4]];
    let left = StationaryMode::new("left", vec![0.9, 0.1], shared.clone())?;
    let right = StationaryMode::new("right", vec![0.1, 0.9], shared.clone())?;
    let modes = Arc::new(ModeSet::uniform(vec![
        Box::new(left) as Box<dyn OperationMode>,
        Box::new(right),
    ])?);

    let mut rng = seeded_rng(7);
    let mut causal = ModePosterior::from_prior(&modes);
    let mut naive = ModePosterior::from_prior(&modes);
    let mut history = InteractionHistory::new();
    println!("{:>4}  {:>6}  {:>12}  {:>12}", "t", "action", "P(left) bcr", "P(left) naive");
    for t in 1..=20 {
        // The agent plays like "left" regardless of what it believes.
        let a = Action(sample_categorical(&[0.9, 0.1], &mut rng)?);
        let o = Observation(sample_categorical(&shared[a.0], &mut rng)?);
        causal = bcr_observe(&causal, &modes, &history, a, o)?;
        naive = naive_update(&naive, &modes, &history, Evidence::Action(a))?;
        naive = naive_update(
            &naive,
            &modes,
            &history,
            Evidence::Observation {
                action: a,
                observation: o,
            },
        )?;
        history.push_step(a, o)?;
        println!("{t:>4}  {:>6}  {:>12.6}  {:>12.6}", a.0, causal.probability(0), naive.probability(0));
    }
    Ok(())
}
