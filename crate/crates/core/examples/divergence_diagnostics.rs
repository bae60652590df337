//! Divergence processes of a recorded control-rule run: sub-divergence
//! decomposition, the posterior bound, and the boundedness estimate.
//!
//! `cargo run --release --example divergence_diagnostics -- [out.csv]`

use std::sync::Arc;

use bayes_control::divergence::{
    build_divergence_trace, decompose_subdivergences, empirical_boundedness, log_posterior_upper_bound,
    record_run_in_mode, write_diagnostics_csv,
};
use bayes_control::engine::ModeSet;
use bayes_control::interaction::{OperationMode, StationaryMode};

fn main() -> bayes_control::Result<()> {
    // Three two-lever modes; each believes in different lever biases and
    // pulls the lever it thinks is better.
    let mk = |label: &str, policy: Vec<f64>, biases: [f64; 2]| {
        StationaryMode::bernoulli(label, policy, &biases).map(|m| Box::new(m) as Box<dyn OperationMode>)
    };
    let modes = Arc::new(ModeSet::uniform(vec![
        mk("a", vec![1.0, 0.0], [0.7, 0.4])?,
        mk("b", vec![0.0, 1.0], [0.4, 0.7])?,
        mk("c", vec![0.5, 0.5], [0.5, 0.5])?,
    ])?);
    let m_star = 0;
    let run = record_run_in_mode(Arc::clone(&modes), m_star, 400, 1)?;

    for target in 1..modes.len() {
        let trace = build_divergence_trace(&run.history, &modes, m_star, target, &run.acting_modes)?;
        let parts = decompose_subdivergences(&trace);
        let bound = log_posterior_upper_bound(&trace, modes.prior());
        let t = trace.len();
        println!(
            "d_{t}(a‖{}) = {:.3}; parts {:?}; posterior {:.3e} <= bound {:.3e}",
            modes.mode(target).label(),
            trace.total(),
            parts.iter().map(|(m, g)| (modes.mode(*m).label().to_string(), (g * 1000.0).round() / 1000.0)).collect::<Vec<_>>(),
            run.posteriors[t][target],
            bound[t].exp(),
        );
    }

    let runs = (0..20)
        .map(|seed| record_run_in_mode(Arc::clone(&modes), m_star, 400, 100 + seed))
        .collect::<bayes_control::Result<Vec<_>>>()?;
    let report = empirical_boundedness(&runs, &modes, m_star, 30, 0.05, 9)?;
    println!("\nboundedness (δ = {}, {} runs):", report.delta, report.runs);
    for e in &report.entries {
        println!(
            "  target {} acting {}: C ≈ {:.2}, growth exponent {:.2}, bounded {}",
            modes.mode(e.target).label(),
            modes.mode(e.policy).label(),
            e.bound,
            e.growth_exponent,
            e.bounded
        );
    }

    let out = std::env::args().nth(1).unwrap_or_else(|| "diagnostics.csv".into());
    write_diagnostics_csv(out.as_ref(), &run, &modes, m_star, 1)?;
    println!("\nper-step table written to {out}");
    Ok(())
}
