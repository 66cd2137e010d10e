//! Numerical consistency residuals for factor models.
//!
//! A curve family `phi(x, z)` and factor drift `mu(z)` form an arbitrage-free
//! model when `-d_x phi + mu . grad phi + 1/2 tr(c hess phi) = phi(x,z) phi(0,z)`.
//! For affine curves the Hessian term drops out, so the residual does not
//! depend on the diffusion at all (the volatility is unspanned).
//!
//! ```bash
//! cargo run --example consistency_check
//! ```

use discount_ts::affine::{build_generator, consistency_residual, AffineParams};
use discount_ts::numerics::SquareMatrix;

fn main() {
    // Toy model: phi(x, z) = e^{-theta x} z, mu(z) = -(theta - z) z.
    let theta = 0.05;
    let toy_phi = |x: f64, z: &[f64]| (-theta * x).exp() * z[0];
    let toy_mu = |z: &[f64]| vec![-(theta - z[0]) * z[0]];

    println!("toy model residuals (any diffusion):");
    for c_level in [0.0, 0.01, 0.5] {
        let c = move |_: &[f64]| SquareMatrix::new(1, vec![c_level]).unwrap();
        let r = consistency_residual(toy_phi, toy_mu, c, 2.0, &[0.03]).unwrap();
        println!("  c = {c_level:<5} -> residual {r:+.3e}");
    }

    // Affine model with its induced quadratic drift.
    let params = AffineParams::new(
        0.005,
        vec![0.03],
        vec![0.03],
        SquareMatrix::new(1, vec![0.02]).unwrap(),
    )
    .unwrap();
    let generator = build_generator(&params).unwrap();
    let phi = |x: f64, z: &[f64]| {
        let pb = generator.phi_bar(x).unwrap();
        pb[0] + pb[1] * z[0]
    };
    let drift_params = params.clone();
    let mu = move |z: &[f64]| drift_params.quadratic_drift(z).unwrap();
    let c = |_: &[f64]| SquareMatrix::new(1, vec![0.04]).unwrap();

    println!();
    println!("affine model residuals:");
    for (x, z) in [(0.5, 0.1), (2.0, 0.45), (8.0, 0.8)] {
        let r = consistency_residual(&phi, &mu, c, x, &[z]).unwrap();
        println!("  (x, z) = ({x}, {z}) -> residual {r:+.3e}");
    }

    // Perturbing one drift coefficient breaks the model visibly.
    let broken = AffineParams::new(
        0.005,
        vec![0.03],
        vec![0.03],
        SquareMatrix::new(1, vec![0.12]).unwrap(),
    )
    .unwrap();
    let mu_bad = move |z: &[f64]| broken.quadratic_drift(z).unwrap();
    let r = consistency_residual(&phi, &mu_bad, c, 2.0, &[0.45]).unwrap();
    println!();
    println!("beta_11 perturbed by +0.1 -> residual {r:+.3e} (should be far from zero)");
}
