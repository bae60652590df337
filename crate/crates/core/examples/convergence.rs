//! Convergence of the predictive action law to the true mode's policy on a
//! two-mode Bernoulli problem, with the posterior floor of the true mode.
//!
//! `cargo run --release --example convergence`

use bayes_control::experiment::{find_curve, run_convergence_experiment, ExperimentConfig};

fn main() -> bayes_control::Result<()> {
    let config = ExperimentConfig::converge_default();
    let report = run_convergence_experiment(&config)?;
    let tv = find_curve(&report.curves, "bcr", "tv").expect("tv curve");
    let post = find_curve(&report.curves, "bcr", "posterior_m_star").expect("posterior curve");
    println!("{:>5}  {:>10}  {:>12}", "t", "mean TV", "P(m*) mean");
    for t in [0, 1, 2, 5, 10, 20, 50, 100, 200, 500] {
        println!("{t:>5}  {:>10.5}  {:>12.6}", tv.at(t).unwrap_or(f64::NAN), post.at(t).unwrap_or(f64::NAN));
    }
    println!(
        "\nTV below tolerance at t = {}: {:.0}% of {} runs; smallest P(m*) after the burn-in: {:.3e}",
        config.steps,
        100.0 * report.settled_fraction,
        report.runs,
        report.min_posterior_after
    );
    Ok(())
}
