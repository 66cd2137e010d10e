//! Two-factor affine discount model: generator matrix, curve functions and
//! the closed-form term structure.
//!
//! ```bash
//! cargo run --example affine_curve
//! ```

use discount_ts::affine::{build_generator, AffineParams, ExtendedState};
use discount_ts::numerics::SquareMatrix;

fn main() {
    // A mildly mean-reverting two-factor model.
    let params = AffineParams::new(
        0.01,                                                     // gamma0
        vec![0.02, 0.015],                                        // gamma
        vec![0.01, 0.02],                                         // b
        SquareMatrix::new(2, vec![-0.3, 0.05, 0.02, -0.6]).unwrap(), // beta
    )
    .unwrap();
    let generator = build_generator(&params).unwrap();

    println!("generator A (row-major):");
    for row in 0..3 {
        let cells: Vec<String> = (0..3)
            .map(|col| format!("{:>9.4}", generator.matrix().get(row, col)))
            .collect();
        println!("  [{}]", cells.join(", "));
    }
    println!("gamma_bar = -A e0 = {:?}", generator.gamma_bar());

    let state = ExtendedState::new(&[0.4, 0.25]).unwrap();
    println!();
    println!("short rate r = {:.6}", generator.short_rate(&state).unwrap());
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>12}",
        "tau", "h", "bond", "discount", "forward"
    );
    for tau in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0] {
        let bond = generator.bond_price(tau, &state).unwrap();
        println!(
            "{tau:>6} {:>12.6} {bond:>12.6} {:>12.6} {:>12.6}",
            generator.h_value(tau, &state).unwrap(),
            generator.discount(tau, &state).unwrap(),
            generator.forward_rate(tau, &state).unwrap()
        );
    }

    // Complementarity and the curve/primitive identities hold to rounding.
    let tau = 7.0;
    let p = generator.bond_price(tau, &state).unwrap();
    let h = generator.discount(tau, &state).unwrap();
    println!();
    println!("P + H - 1 at tau = {tau}: {:+.2e}", p + h - 1.0);
    let prim = generator.phi_primitive(tau).unwrap();
    let via_prim: f64 = prim
        .iter()
        .zip(state.z_bar())
        .map(|(a, b)| a * b)
        .sum();
    println!("Phibar(tau).zbar - H:    {:+.2e}", via_prim - h);
}
