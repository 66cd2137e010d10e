//! One-factor toy model with a bounded short rate.
//!
//! `h(t, T) = e^{-theta (T-t)} r_t` with the mean-reverting rate
//! `dr = -(theta - r) r dt + sigma(t,t) dW`. When the spot volatility decays
//! fast enough at both ends, the rate stays in `[0, theta]`, the discount
//! curve is decreasing and bond prices stay positive. The spot volatility
//! here is `vol * r (theta - r) / theta^2`, a symmetric boundary damping.

use crate::error::{ensure_finite_scalar, ModelError, Result};
use crate::factors::{PathBundle, SimConfig};
use crate::numerics::RngStream;
use rayon::prelude::*;

/// Toy-model parameters: mean-reversion bound `theta` and spot-vol scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyParams {
    pub theta: f64,
    pub vol: f64,
}

impl ToyParams {
    pub fn new(theta: f64, vol: f64) -> Result<Self> {
        ensure_finite_scalar("theta", theta)?;
        ensure_finite_scalar("vol", vol)?;
        if theta <= 0.0 {
            return Err(ModelError::invalid("theta must be positive"));
        }
        if vol < 0.0 {
            return Err(ModelError::invalid("vol must be >= 0"));
        }
        Ok(Self { theta, vol })
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        ensure_finite_scalar("tau", tau)?;
        if tau < 0.0 {
            return Err(ModelError::OutOfRange(format!("tau must be >= 0, got {tau}")));
        }
        Ok(())
    }

    /// True when `r` is inside the invariant band `[0, theta]`. Curve values
    /// are still computed outside the band; callers decide whether to warn.
    pub fn rate_in_domain(&self, r: f64) -> bool {
        (0.0..=self.theta).contains(&r)
    }

    /// Discount derivative `h = e^{-theta tau} r`.
    pub fn h(&self, r: f64, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        Ok((-self.theta * tau).exp() * r)
    }

    /// Discount `H = (1 - e^{-theta tau}) r / theta`.
    pub fn discount(&self, r: f64, tau: f64) -> Result<f64> {
        self.check_tau(tau)?;
        Ok((1.0 - (-self.theta * tau).exp()) * r / self.theta)
    }

    /// Bond price `P = 1 - H`.
    pub fn bond(&self, r: f64, tau: f64) -> Result<f64> {
        Ok(1.0 - self.discount(r, tau)?)
    }

    /// Boundary-damped spot volatility `vol * r (theta - r) / theta^2`.
    pub fn spot_vol(&self, r: f64) -> f64 {
        self.vol * r * (self.theta - r) / (self.theta * self.theta)
    }

    /// The equivalent one-factor affine model:
    /// gamma0 = 0, gamma_1 = 1, b_1 = 0, beta_11 = -theta.
    pub fn to_affine(&self) -> crate::affine::AffineParams {
        crate::affine::AffineParams::new(
            0.0,
            vec![1.0],
            vec![0.0],
            crate::numerics::SquareMatrix::new(1, vec![-self.theta]).unwrap(),
        )
        .unwrap()
    }
}

/// Euler paths of the bounded short rate, clamped to `[0, theta]`.
pub fn simulate_toy_rate(p: &ToyParams, r0: f64, cfg: &SimConfig) -> Result<PathBundle> {
    cfg.validate()?;
    ensure_finite_scalar("r0", r0)?;
    if !p.rate_in_domain(r0) {
        return Err(ModelError::OutOfRange(format!(
            "r0 = {r0} outside [0, {}]",
            p.theta
        )));
    }
    let n_rec = if cfg.n_steps == 0 {
        1
    } else {
        cfg.n_steps / cfg.record_stride + 1
    };
    let mut states = vec![0.0; cfg.n_paths * n_rec];
    let sqrt_dt = cfg.dt.sqrt();
    let theta = p.theta;
    let clamp_counts: Vec<u64> = states
        .par_chunks_mut(n_rec)
        .enumerate()
        .map(|(path, out)| {
            let mut src = RngStream::new(cfg.seed, path as u64).normal_source();
            let mut r = r0;
            let mut clamps = 0u64;
            out[0] = r;
            let mut rec = 1;
            for step in 1..=cfg.n_steps {
                let xi = src.next_normal();
                r += -(theta - r) * r * cfg.dt + p.spot_vol(r) * sqrt_dt * xi;
                if r < 0.0 {
                    r = 0.0;
                    clamps += 1;
                } else if r > theta {
                    r = theta;
                    clamps += 1;
                }
                if step % cfg.record_stride == 0 {
                    out[rec] = r;
                    rec += 1;
                }
            }
            clamps
        })
        .collect();
    PathBundle::from_parts(cfg, 1, states, clamp_counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_at_zero_and_reference_point() {
        let p = ToyParams::new(0.05, 0.0).unwrap();
        let r = 0.03;
        assert_eq!(p.h(r, 0.0).unwrap(), r);
        assert_eq!(p.discount(r, 0.0).unwrap(), 0.0);
        assert_eq!(p.bond(r, 0.0).unwrap(), 1.0);

        let disc = p.discount(r, 10.0).unwrap();
        let bond = p.bond(r, 10.0).unwrap();
        assert!((disc - 0.236082).abs() < 5e-7, "H = {disc}");
        assert!((bond - 0.763918).abs() < 5e-7, "P = {bond}");
        assert!(p.h(r, -1.0).is_err());
    }

    #[test]
    fn bond_price_stays_positive_at_the_boundary() {
        let p = ToyParams::new(0.05, 0.0).unwrap();
        // r = theta: H -> r/theta = 1 only in the infinite-maturity limit.
        let bond = p.bond(0.05, 500.0).unwrap();
        let expect = (-0.05f64 * 500.0).exp();
        assert!((bond - expect).abs() < 1e-10);
        assert!(bond >= 0.0);
        // Out-of-band rates still evaluate (domain warning is the caller's).
        assert!(p.bond(0.06, 10.0).is_ok());
        assert!(!p.rate_in_domain(0.06));
    }

    #[test]
    fn deterministic_rate_follows_logistic_ode() {
        // nu = 0: r' = -(theta - r) r, separable with solution
        // r(t) = theta / (1 + ((theta - r0)/r0) e^{theta t}).
        let theta = 0.05;
        let p = ToyParams::new(theta, 0.0).unwrap();
        let r0 = theta / 2.0;
        let cfg = SimConfig::new(1e-4, 10_000, 1, 0).with_record_stride(10_000);
        let bundle = simulate_toy_rate(&p, r0, &cfg).unwrap();
        let t = 1.0;
        let exact = theta / (1.0 + ((theta - r0) / r0) * (theta * t).exp());
        let got = bundle.terminal(0)[0];
        assert!((got - exact).abs() < 1e-6, "got {got}, exact {exact}");
    }

    #[test]
    fn boundary_rates_are_fixed_points() {
        let p = ToyParams::new(0.05, 0.0).unwrap();
        let cfg = SimConfig::new(1e-3, 100, 1, 0);
        for r0 in [0.0, 0.05] {
            let bundle = simulate_toy_rate(&p, r0, &cfg).unwrap();
            for rec in 0..bundle.n_recorded() {
                assert_eq!(bundle.state(0, rec)[0], r0);
            }
        }
    }

    #[test]
    fn paths_remain_in_band_with_low_clamping() {
        let theta = 0.05;
        let p = ToyParams::new(theta, 0.5 * theta).unwrap();
        let cfg = SimConfig::new(1e-3, 1000, 300, 13);
        let bundle = simulate_toy_rate(&p, 0.03, &cfg).unwrap();
        for path in 0..300 {
            for rec in 0..bundle.n_recorded() {
                let r = bundle.state(path, rec)[0];
                assert!((0.0..=theta).contains(&r));
            }
        }
        assert!(
            bundle.clamp_fraction() < 0.01,
            "clamp fraction {}",
            bundle.clamp_fraction()
        );
    }

    #[test]
    fn invalid_r0_rejected() {
        let p = ToyParams::new(0.05, 0.1).unwrap();
        let cfg = SimConfig::new(1e-3, 10, 1, 0);
        assert!(simulate_toy_rate(&p, -0.01, &cfg).is_err());
        assert!(simulate_toy_rate(&p, 0.06, &cfg).is_err());
    }
}
