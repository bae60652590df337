//! The membrane grid-world: the Gibbs-sampling control-rule agent against
//! R-learning with three exploration constants.
//!
//! `cargo run --release --example gridworld -- [runs] [steps]`
//!
//! Defaults to 2 runs x 150,000 steps; the full comparison is
//! `bcr gridworld` (10 runs x 300,000 steps).

use bayes_control::experiment::{run_gridworld_experiment, ExperimentConfig};
use bayes_control::gridworld::{inverted_cups, solve_average_reward};

fn main() -> bayes_control::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let map = inverted_cups();
    println!("{map}");
    let solution = solve_average_reward(&map)?;
    println!("optimal average reward {:.4}\n", solution.rho);

    let mut config = ExperimentConfig::gridworld_default();
    config.runs = args.first().copied().unwrap_or(2);
    config.steps = args.get(1).copied().unwrap_or(150_000);
    let report = run_gridworld_experiment(&config)?;
    println!("average reward over the last 5,000 steps ({} runs x {} steps)", config.runs, config.steps);
    for s in &report.summary {
        println!("  {:<18} {:.4} ± {:.4}", s.agent, s.mean, s.std);
    }
    for occ in report.occupancy.iter().filter(|o| o.window == "last") {
        println!("\n{} (last window): visit share and most frequent action", occ.agent);
        println!("{}", occ.render(&map));
    }
    Ok(())
}
