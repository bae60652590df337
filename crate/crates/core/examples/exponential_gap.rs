//! Steps until the control rule first earns a reward when only `k`
//! consecutive plays of an unknown action pay, against a probing strategy
//! that needs at most `2k` steps.
//!
//! `cargo run --release --example exponential_gap -- [runs]`

use bayes_control::experiment::{run_exponential_gap_experiment, ExperimentConfig, ExperimentKind, ExpGapSettings};

fn main() -> bayes_control::Result<()> {
    let runs = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    let config = ExperimentConfig {
        runs,
        kind: ExperimentKind::ExpGap(ExpGapSettings { ks: vec![2, 4, 6, 8, 10] }),
        ..ExperimentConfig::exp_gap_default()
    };
    let report = run_exponential_gap_experiment(&config)?;
    println!("{:>4}  {:>10}  {:>10}  {:>8}  {:>11}", "k", "median", "mean", "capped", "probe worst");
    for r in &report.rows {
        println!(
            "{:>4}  {:>10.1}  {:>10.1}  {:>8}  {:>11}",
            r.k, r.median, r.mean, r.capped, r.probe_worst
        );
    }
    Ok(())
}
