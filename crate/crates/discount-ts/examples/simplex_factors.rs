//! Simplex-valued factor processes: simulate the nonnegative U-process, map
//! it through G(u) = u/(1 + sum u), and compare with the directly simulated
//! simplex process Z. Both have the same law; the induced short rate is
//! uniformly bounded.
//!
//! ```bash
//! cargo run --example simplex_factors
//! ```

use discount_ts::factors::{
    g_forward, g_inverse, simulate_u, simulate_z, SimConfig, SimplexFactorParams,
};

fn main() {
    let p = SimplexFactorParams::new(
        vec![0.1, -0.2],  // kappa
        vec![0.05, 0.05], // theta
        vec![0.3, 0.4],   // q
        0.0,              // gamma0
    )
    .unwrap();
    let z0 = [0.2, 0.3];
    let u0 = g_inverse(&z0).unwrap();
    println!("z0 = {z0:?} maps back to u0 = {u0:?}");

    let n_paths = 20_000;
    let n_steps = 1000;
    let cfg_u = SimConfig::new(1e-3, n_steps, n_paths, 11).with_record_stride(n_steps);
    let cfg_z = SimConfig::new(1e-3, n_steps, n_paths, 22).with_record_stride(n_steps);
    let u = simulate_u(&p, &u0, &cfg_u).unwrap();
    let z = simulate_z(&p, &z0, &cfg_z).unwrap();

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    for comp in 0..2 {
        let gu: Vec<f64> = (0..n_paths)
            .map(|path| g_forward(u.terminal(path)).unwrap()[comp])
            .collect();
        let zt: Vec<f64> = (0..n_paths).map(|path| z.terminal(path)[comp]).collect();
        println!(
            "component {comp}: mean G(U_1) = {:.5}, mean Z_1 = {:.5}",
            mean(&gu),
            mean(&zt)
        );
    }
    println!(
        "clamp fractions: U {:.2e}, Z {:.2e}",
        u.clamp_fraction(),
        z.clamp_fraction()
    );

    // The induced affine model bounds the short rate by |gamma0| + max |gamma_j|.
    let affine = p.to_affine_params();
    let bound = affine.gamma0().abs()
        + affine
            .gamma()
            .iter()
            .fold(0.0f64, |m, g| m.max(g.abs()));
    println!();
    println!(
        "induced affine coefficients: gamma = {:?}, b = {:?}, beta_diag = {:?}",
        affine.gamma(),
        affine.b(),
        (0..2).map(|i| affine.beta().get(i, i)).collect::<Vec<_>>()
    );
    println!("short rate is bounded by |gamma0| + max|gamma_j| = {bound:.4}");
}
