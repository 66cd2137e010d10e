//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::time::Instant;

use discount_ts::affine::{build_generator, AffineParams, ExtendedState};
use discount_ts::factors::{
    g_forward, g_inverse, simulate_u, simulate_z, SimConfig, SimplexFactorParams,
};
use discount_ts::hjm_grid::{
    simulate_grid, spde_flow, CurveGrid, GridSimOptions, Psi0, ToyParams, VolSpec,
};
use discount_ts::numerics::{mat_vec, SquareMatrix};
use discount_ts::validate::theorem_battery;
use discount_ts::ModelError;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Criteria carry per-criterion runtime budgets; run them one at a time so a
// heavy Monte Carlo test does not steal another criterion's wall clock.
static GATE: std::sync::Mutex<()> = std::sync::Mutex::new(());

fn serialize_tests() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn conclude(criterion: &str, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    println!("[PASS] {criterion} ({elapsed:.2}s, budget {budget_s:.0}s)");
    assert!(
        elapsed < budget_s,
        "{criterion}: runtime {elapsed:.2}s exceeded budget {budget_s}s"
    );
}

/// Reference stochastic factor model used by criteria 3, 4 and 10.
fn reference_model() -> SimplexFactorParams {
    SimplexFactorParams::new(vec![0.01], vec![0.03], vec![0.2], 0.005).unwrap()
}

/// Two-factor example parameters used by criteria 7 and 9.
fn example_model_d2() -> SimplexFactorParams {
    SimplexFactorParams::new(vec![0.1, -0.2], vec![0.05, 0.05], vec![0.3, 0.4], 0.0).unwrap()
}

#[test]
fn acceptance_01_toy_affine_equivalence() {
    let _gate = serialize_tests();
    let start = Instant::now();
    let theta = 0.05;
    let toy = ToyParams::new(theta, 0.0).unwrap();
    let generator = build_generator(&toy.to_affine()).unwrap();
    for &r in &[0.0, 0.01, 0.03, 0.05] {
        let state = ExtendedState::new(&[r]).unwrap();
        for &tau in &[0.0, 1.0, 5.0, 10.0, 50.0] {
            let h_affine = generator.discount(tau, &state).unwrap();
            let p_affine = generator.bond_price(tau, &state).unwrap();
            let h_toy = toy.discount(r, tau).unwrap();
            let p_toy = toy.bond(r, tau).unwrap();
            assert!(
                (h_affine - h_toy).abs() < 1e-10,
                "H mismatch at r={r}, tau={tau}: {h_affine} vs {h_toy}"
            );
            assert!(
                (p_affine - p_toy).abs() < 1e-10,
                "P mismatch at r={r}, tau={tau}: {p_affine} vs {p_toy}"
            );
        }
    }
    conclude("criterion 1: toy/affine equivalence to 1e-10", start, 1.0);
}

#[test]
fn acceptance_02_ode_consistency() {
    let _gate = serialize_tests();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20260810);
    let h = 1e-4;
    for trial in 0..50 {
        let d = rng.random_range(1..=4usize);
        let gamma0 = rng.random_range(-1.0..1.0);
        let gamma: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let beta: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let params =
            AffineParams::new(gamma0, gamma, b, SquareMatrix::new(d, beta).unwrap()).unwrap();
        let generator = build_generator(&params).unwrap();
        let x = rng.random_range(0.01..10.0);
        let up = generator.phi_bar(x + h).unwrap();
        let dn = generator.phi_bar(x - h).unwrap();
        let phi = generator.phi_bar(x).unwrap();
        let exact = mat_vec(generator.matrix(), &phi).unwrap();
        let scale = exact
            .iter()
            .chain(&phi)
            .map(|v| v.abs())
            .fold(1e-8, f64::max);
        for k in 0..=d {
            let fd = (up[k] - dn[k]) / (2.0 * h);
            let rel = (fd - exact[k]).abs() / scale;
            assert!(
                rel < 1e-6,
                "trial {trial}, x={x}, component {k}: relative error {rel}"
            );
        }
    }
    conclude(
        "criterion 2: phi' = A phi by central differences (50 models)",
        start,
        1.0,
    );
}

#[test]
fn acceptance_03_theorem_battery_stochastic() {
    let _gate = serialize_tests();
    let start = Instant::now();
    let p = reference_model();
    let reports = theorem_battery(&p, &[0.3], 5.0, 1e-3, 200_000, 42).unwrap();
    for r in &reports {
        assert!(
            r.passed,
            "{}: estimate {} vs reference {} (se {})",
            r.check_name, r.estimate, r.reference, r.std_error
        );
    }
    assert!(reports.iter().any(|r| r.check_name.contains("mc_bond_price")));
    assert!(reports.iter().any(|r| r.check_name.contains("mc_h_value")));
    assert!(reports.iter().any(|r| r.check_name.contains("mc_discount")));
    conclude(
        "criterion 3: Theorem-battery within 3 SE (2e5 paths, T=5, dt=1e-3)",
        start,
        60.0,
    );
}

#[test]
fn acceptance_04_deterministic_limit() {
    let _gate = serialize_tests();
    let start = Instant::now();
    let p = SimplexFactorParams::new(vec![0.01], vec![0.03], vec![0.0], 0.005).unwrap();
    let reports = theorem_battery(&p, &[0.3], 5.0, 1e-4, 1, 42).unwrap();
    for r in &reports {
        assert!(
            (r.estimate - r.reference).abs() <= 1e-4,
            "{}: |{} - {}| > 1e-4",
            r.check_name,
            r.estimate,
            r.reference
        );
        assert!(r.passed, "{}", r.check_name);
    }
    conclude(
        "criterion 4: deterministic limit (q=0, dt=1e-4) to absolute 1e-4",
        start,
        60.0,
    );
}

#[test]
fn acceptance_05_drift_condition() {
    let _gate = serialize_tests();
    let start = Instant::now();
    // Toy-consistent initial curve h(0, x) = r0 e^{-theta x}.
    let (theta, r0) = (0.05, 0.03);
    let initial = CurveGrid::uniform(0.0, 0.02, 51, |x| r0 * (-theta * x).exp()).unwrap();
    let cfg = SimConfig::new(0.02, 25, 10_000, 7);
    let vol = VolSpec::Constant { level: 1e-4 };
    let ens = simulate_grid(&initial, &vol, &GridSimOptions::default(), &cfg).unwrap();
    let report = discount_ts::validate::drift_condition_check(&ens);
    assert!(
        report.passed,
        "drift condition violated: {} vs {} (se {})",
        report.estimate, report.reference, report.std_error
    );

    let probe_opts = GridSimOptions {
        zero_drift: true,
        ..Default::default()
    };
    let probe = simulate_grid(&initial, &vol, &probe_opts, &cfg).unwrap();
    let probe_report = discount_ts::validate::drift_condition_check(&probe);
    assert!(!probe_report.passed, "drift-zeroed probe must fail");
    assert!(
        probe_report.reference.abs() > 1e-5,
        "probe failure should occur where the reference is material, got {}",
        probe_report.reference
    );
    conclude(
        "criterion 5: drift condition within 3 SE at 20 points; zeroed probe fails",
        start,
        30.0,
    );
}

#[test]
fn acceptance_06_deterministic_spde() {
    let _gate = serialize_tests();
    let start = Instant::now();
    let dt = 1.0 / 64.0;
    let n_steps = 128; // two years
    let curves: [Box<dyn Fn(f64) -> f64>; 2] = [
        Box::new(|x: f64| 0.05 * (-0.05 * x).exp()),
        Box::new(|x: f64| 0.02 * (-0.1 * x).exp()),
    ];
    for (idx, f) in curves.iter().enumerate() {
        let grid = CurveGrid::uniform(0.0, dt, 193, f).unwrap();
        let psi0 = Psi0::from_grid(&grid).unwrap();
        let cfg = SimConfig::new(dt, n_steps, 1, 0);
        let ens =
            simulate_grid(&grid, &VolSpec::Zero, &GridSimOptions::default(), &cfg).unwrap();
        for step in 0..=n_steps {
            let t = ens.time(step);
            for node in step..ens.n_nodes() {
                let x = ens.maturities()[node] - t;
                let flow = spde_flow(&psi0, t, x).unwrap();
                let sim = ens.h(0, step, node);
                assert!(
                    (flow - sim).abs() < 1e-10,
                    "curve {idx}, step {step}, node {node}: {sim} vs {flow}"
                );
            }
        }
    }
    // Constant curve c = 0.5 over 3y explodes near 1/c = 2.
    let c = 0.5;
    let grid = CurveGrid::uniform(0.0, 0.01, 301, |_| c).unwrap();
    let cfg = SimConfig::new(0.01, 300, 1, 0);
    match simulate_grid(&grid, &VolSpec::Zero, &GridSimOptions::default(), &cfg) {
        Err(ModelError::Explosion { time, .. }) => {
            assert!(time > 1.9 && time < 2.1, "explosion at {time}");
        }
        other => panic!("expected explosion, got {other:?}"),
    }
    conclude(
        "criterion 6: zero-vol grid matches flow to 1e-10; explosion in (1.9, 2.1)",
        start,
        5.0,
    );
}

#[test]
fn acceptance_07_simplex_invariance() {
    let _gate = serialize_tests();
    let start = Instant::now();
    let p = example_model_d2();
    let affine = p.to_affine_params();
    let bound = affine.gamma0().abs()
        + affine
            .gamma()
            .iter()
            .fold(0.0f64, |m, g| m.max(g.abs()));
    let cfg = SimConfig::new(1e-3, 1000, 10_000, 1234);
    let bundle = simulate_z(&p, &[0.2, 0.3], &cfg).unwrap();
    for path in 0..bundle.n_paths {
        for rec in 0..bundle.n_recorded() {
            let z = bundle.state(path, rec);
            assert!(
                z.iter().all(|v| *v >= 0.0) && z.iter().sum::<f64>() <= 1.0,
                "path {path}, step {rec}: {z:?} left the simplex"
            );
            let r = affine.gamma0()
                + affine
                    .gamma()
                    .iter()
                    .zip(z)
                    .map(|(g, zi)| g * zi)
                    .sum::<f64>();
            assert!(
                r.abs() <= bound + 1e-12,
                "path {path}, step {rec}: |r| = {} > {bound}",
                r.abs()
            );
        }
    }
    let clamp = bundle.clamp_fraction();
    assert!(clamp < 0.01, "clamp fraction {clamp}");
    conclude(
        "criterion 7: 1e4 simplex paths stay in the simplex; bounded short rate",
        start,
        30.0,
    );
}

#[test]
fn acceptance_08_drift_mapping() {
    let _gate = serialize_tests();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    for trial in 0..50 {
        let d = rng.random_range(1..=4usize);
        let kappa: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let theta: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let q: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let gamma0 = rng.random_range(-0.1..0.1);
        let p = SimplexFactorParams::new(kappa.clone(), theta.clone(), q.clone(), gamma0)
            .unwrap();
        // Random interior simplex point via the forward map.
        let u: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..5.0)).collect();
        let z = g_forward(&u).unwrap();
        let via_affine = p
            .to_affine_params()
            .quadratic_drift(&z)
            .unwrap();
        // Independent evaluation of the transformed-process drift:
        // theta_i + (-theta_V + kappa_i - q_i^2) z_i + z_i sum_j (q_j^2 - kappa_j) z_j.
        let theta_v: f64 = theta.iter().sum();
        for i in 0..d {
            let quad: f64 = (0..d)
                .map(|j| (q[j] * q[j] - kappa[j]) * z[j])
                .sum();
            let direct = theta[i] + (-theta_v + kappa[i] - q[i] * q[i]) * z[i] + z[i] * quad;
            assert!(
                (via_affine[i] - direct).abs() <= 1e-12,
                "trial {trial}, component {i}: {} vs {direct}",
                via_affine[i]
            );
        }
    }
    conclude(
        "criterion 8: induced quadratic drift matches the transformed dynamics to 1e-12",
        start,
        1.0,
    );
}

#[test]
fn acceptance_09_transform_equivalence() {
    let _gate = serialize_tests();
    let start = Instant::now();
    let p = example_model_d2();
    let z0 = [0.2, 0.3];
    let u0 = g_inverse(&z0).unwrap();
    let n_paths = 100_000;
    let n_steps = 1000;
    let cfg_u = SimConfig::new(1e-3, n_steps, n_paths, 1001).with_record_stride(n_steps);
    let cfg_z = SimConfig::new(1e-3, n_steps, n_paths, 2002).with_record_stride(n_steps);
    let u = simulate_u(&p, &u0, &cfg_u).unwrap();
    let z = simulate_z(&p, &z0, &cfg_z).unwrap();
    for comp in 0..2 {
        let gu: Vec<f64> = (0..n_paths)
            .map(|pth| g_forward(u.terminal(pth)).unwrap()[comp])
            .collect();
        let zt: Vec<f64> = (0..n_paths).map(|pth| z.terminal(pth)[comp]).collect();
        let stats = |xs: &[f64]| {
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            (mean, (var / n).sqrt())
        };
        let (mu_u, se_u) = stats(&gu);
        let (mu_z, se_z) = stats(&zt);
        let se = (se_u * se_u + se_z * se_z).sqrt();
        assert!(
            (mu_u - mu_z).abs() <= 3.0 * se,
            "component {comp}: G(U) mean {mu_u} vs Z mean {mu_z} (se {se})"
        );
    }
    conclude(
        "criterion 9: mean G(U_1) agrees with mean Z_1 within 3 SE (1e5 paths)",
        start,
        60.0,
    );
}

#[test]
fn acceptance_10_reproducibility() {
    let _gate = serialize_tests();
    let start = Instant::now();
    use discount_ts::cli::{cmd_validate, ModelConfig, ModelSpec, OutputBlock};

    let run_with_threads = |threads: usize, dir: &std::path::Path| -> Vec<u8> {
        let cfg = ModelConfig {
            model: ModelSpec::SimplexFactors {
                kappa: vec![0.01],
                theta: vec![0.03],
                q: vec![0.2],
                gamma0: 0.005,
                z0: vec![0.3],
            },
            sim: SimConfig::new(1e-3, 1000, 20_000, 42),
            output: OutputBlock {
                directory: dir.display().to_string(),
                formats: vec!["json".into()],
            },
            tau_grid: None,
            spde: None,
            validate: None,
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let (_, json_path) = pool.install(|| cmd_validate(&cfg).unwrap());
        std::fs::read(json_path).unwrap()
    };

    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let dir3 = tempfile::tempdir().unwrap();
    let a = run_with_threads(1, dir1.path());
    let b = run_with_threads(2, dir2.path());
    let c = run_with_threads(4, dir3.path());
    assert_eq!(a, b, "reports differ between 1 and 2 threads");
    assert_eq!(a, c, "reports differ between 1 and 4 threads");
    conclude(
        "criterion 10: validate JSON byte-identical across thread counts",
        start,
        120.0,
    );
}
