//! Ten-lever Bernoulli bandit: the control rule (posterior sampling) against
//! decaying epsilon-greedy and the Gittins-index policy.
//!
//! `cargo run --release --example bandit_comparison -- [runs] [steps]`
//!
//! The first run builds the Gittins table (about 20 s) and caches it in the
//! system temp directory.

use bayes_control::experiment::{find_curve, run_bandit_experiment, ExperimentConfig};

fn main() -> bayes_control::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut config = ExperimentConfig::bandit_default();
    config.runs = args.first().copied().unwrap_or(config.runs);
    config.steps = args.get(1).copied().unwrap_or(config.steps).min(1299);
    let curves = run_bandit_experiment(&config)?;

    println!("{} runs x {} steps, {} levers", config.runs, config.steps, 10);
    println!("{:>6}  {:>28}  {:>28}", "", "% best lever", "average reward");
    println!("{:>6}  {:>8} {:>9} {:>9}  {:>8} {:>9} {:>9}", "t", "bcr", "eps", "gittins", "bcr", "eps", "gittins");
    let agents = ["bcr", "epsilon_greedy", "gittins"];
    for t in [1, 10, 50, 100, 200, 500, 1000].into_iter().filter(|&t| t <= config.steps) {
        let col = |metric: &str| -> Vec<f64> {
            agents
                .iter()
                .map(|a| find_curve(&curves, a, metric).and_then(|c| c.at(t)).unwrap_or(f64::NAN))
                .collect()
        };
        let (best, avg) = (col("pct_best"), col("avg_reward"));
        println!(
            "{t:>6}  {:>8.1} {:>9.1} {:>9.1}  {:>8.3} {:>9.3} {:>9.3}",
            best[0], best[1], best[2], avg[0], avg[1], avg[2]
        );
    }
    Ok(())
}
