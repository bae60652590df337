//! Gittins indices for Bernoulli levers under a uniform prior.
//!
//! `cargo run --release --example gittins_table -- [horizon] [discount]`

use bayes_control::bandit::compute_gittins_table;

fn main() -> bayes_control::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let horizon = args.first().and_then(|a| a.parse().ok()).unwrap_or(400);
    let discount = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(0.9);
    let table = compute_gittins_table(horizon, discount, 1e-4)?;

    println!("horizon {horizon}, discount {discount}; rows: successes, columns: failures");
    print!("{:>4}", "");
    for f in 0..8 {
        print!("{f:>8}");
    }
    println!();
    for s in 0..8u64 {
        print!("{s:>4}");
        for f in 0..8u64 {
            print!("{:>8.4}", table.index(s, f)?);
        }
        println!();
    }
    Ok(())
}
