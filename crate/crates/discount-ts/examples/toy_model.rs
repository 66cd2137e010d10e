//! One-factor toy model: closed-form curves and the bounded short rate.
//!
//! ```bash
//! cargo run --example toy_model
//! ```

use discount_ts::factors::SimConfig;
use discount_ts::hjm_grid::{simulate_toy_rate, ToyParams};

fn main() {
    let theta = 0.05;
    let toy = ToyParams::new(theta, 0.5 * theta).unwrap();
    let r = 0.03;

    println!("term structure at r = {r} (theta = {theta}):");
    println!("{:>6} {:>12} {:>12} {:>12}", "tau", "h", "discount", "bond");
    for tau in [0.0, 1.0, 5.0, 10.0, 30.0] {
        println!(
            "{tau:>6} {:>12.6} {:>12.6} {:>12.6}",
            toy.h(r, tau).unwrap(),
            toy.discount(r, tau).unwrap(),
            toy.bond(r, tau).unwrap()
        );
    }

    // The spot volatility vanishes at both ends of [0, theta], so the rate
    // cannot leave the band.
    let cfg = SimConfig::new(1e-3, 2000, 2000, 42);
    let bundle = simulate_toy_rate(&toy, r, &cfg).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut terminal_mean = 0.0;
    for path in 0..bundle.n_paths {
        for rec in 0..bundle.n_recorded() {
            let v = bundle.state(path, rec)[0];
            lo = lo.min(v);
            hi = hi.max(v);
        }
        terminal_mean += bundle.terminal(path)[0];
    }
    terminal_mean /= bundle.n_paths as f64;
    println!();
    println!(
        "{} paths over {} years: rate range [{lo:.6}, {hi:.6}], terminal mean {terminal_mean:.6}",
        bundle.n_paths,
        bundle.dt * bundle.n_steps as f64
    );
    println!(
        "boundary clamps per simulated step: {:.3e}",
        bundle.clamp_fraction()
    );
}
