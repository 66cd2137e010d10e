//! Discount-derivative curve dynamics on a maturity grid.
//!
//! The arbitrage-free dynamics of the discount derivative are
//! `dh(t,T) = h(t,T) h(t,t) dt + sigma(t,T) dW` — the drift couples every
//! maturity to the diagonal and does not involve the volatility. The
//! simulator works on a maturity lattice that coincides with the time
//! lattice, so the diagonal `h(t,t)` is always read exactly off a node and
//! never interpolated.
//!
//! The drift step is applied as the multiplicative flow factor
//! `1 / (1 - dt (h(t,t) + h(t,t+dt)) / 2)`, which is the exact solution of
//! the deterministic curve flow with a trapezoid-discretized primitive and
//! agrees with the additive Euler drift `h h(t,t) dt` to O(dt^2) per step.
//! With zero volatility the simulated curve therefore reproduces
//! [`flow::spde_flow`] on a sampled initial curve to rounding.

mod flow;
mod toy;

pub use flow::{spde_flow, Psi0};
pub use toy::{simulate_toy_rate, ToyParams};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_finite_scalar, ModelError, Result};
use crate::factors::SimConfig;
use crate::numerics::RngStream;

/// Sampled discount-derivative curve `h(t, .)` on a strictly increasing
/// maturity grid with `T_1 >= t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveGrid {
    t: f64,
    maturities: Vec<f64>,
    h_values: Vec<f64>,
}

impl CurveGrid {
    pub fn new(t: f64, maturities: Vec<f64>, h_values: Vec<f64>) -> Result<Self> {
        ensure_finite_scalar("t", t)?;
        ensure_finite("maturities", &maturities)?;
        ensure_finite("h_values", &h_values)?;
        if maturities.len() != h_values.len() || maturities.len() < 2 {
            return Err(ModelError::DimensionMismatch(format!(
                "{} maturities vs {} curve values (need matching lengths >= 2)",
                maturities.len(),
                h_values.len()
            )));
        }
        if maturities.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::invalid("maturities must be strictly increasing"));
        }
        if maturities[0] < t {
            return Err(ModelError::OutOfRange(format!(
                "first maturity {} precedes current time {t}",
                maturities[0]
            )));
        }
        Ok(Self {
            t,
            maturities,
            h_values,
        })
    }

    /// Samples `h(t, T) = f(T - t)` on `t + x` for each offset in `offsets`.
    pub fn sample(t: f64, offsets: &[f64], f: impl Fn(f64) -> f64) -> Result<Self> {
        let maturities: Vec<f64> = offsets.iter().map(|x| t + x).collect();
        let h_values: Vec<f64> = offsets.iter().map(|x| f(*x)).collect();
        Self::new(t, maturities, h_values)
    }

    /// Uniform lattice `t, t + dt, ..., t + m dt` sampled from `f(T - t)`.
    pub fn uniform(t: f64, dt: f64, nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if nodes < 2 {
            return Err(ModelError::invalid("need at least 2 grid nodes"));
        }
        let offsets: Vec<f64> = (0..nodes).map(|j| j as f64 * dt).collect();
        Self::sample(t, &offsets, f)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn maturities(&self) -> &[f64] {
        &self.maturities
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h_values
    }

    /// Positivity diagnostic: trapezoid of the curve from the first node out
    /// to each maturity; the largest value must stay below 1 for positive
    /// bond prices.
    pub fn max_discount_integral(&self) -> f64 {
        let mut acc = 0.0f64;
        let mut max = 0.0f64;
        for w in self.maturities.windows(2).zip(self.h_values.windows(2)) {
            let (ts, hs) = w;
            acc += 0.5 * (hs[0] + hs[1]) * (ts[1] - ts[0]);
            max = max.max(acc);
        }
        max
    }
}

/// Volatility shape for the grid dynamics, driven by a single Brownian
/// motion: `zero`, `constant` level, or `proportional` to the curve value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolSpec {
    Zero,
    Constant { level: f64 },
    Proportional { level: f64 },
}

impl VolSpec {
    pub fn sigma(&self, h: f64) -> f64 {
        match self {
            VolSpec::Zero => 0.0,
            VolSpec::Constant { level } => *level,
            VolSpec::Proportional { level } => level * h,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, VolSpec::Zero)
            || matches!(self, VolSpec::Constant { level } | VolSpec::Proportional { level } if *level == 0.0)
    }

    fn validate(&self) -> Result<()> {
        match self {
            VolSpec::Zero => Ok(()),
            VolSpec::Constant { level } | VolSpec::Proportional { level } => {
                ensure_finite_scalar("vol level", *level)
            }
        }
    }
}

/// Knobs of the grid simulator.
///
/// `market_price_of_risk` switches the ensemble to physical-measure
/// dynamics `dh = (h h(t,t) + sigma theta) dt + sigma dW`. `zero_drift` is a
/// diagnostic probe that removes the no-arbitrage drift entirely (the drift
/// condition check must then fail). `h_max` is the explosion guard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSimOptions {
    pub h_max: f64,
    pub market_price_of_risk: Option<f64>,
    pub zero_drift: bool,
}

impl Default for GridSimOptions {
    fn default() -> Self {
        Self {
            h_max: 1e3,
            market_price_of_risk: None,
            zero_drift: false,
        }
    }
}

/// Ensemble of simulated curve trajectories on the shared maturity lattice.
///
/// Node `j` holds maturity `j * dt`; the diagonal at step `k` is node `k`.
/// Nodes with `T_j < t` are dead and keep their last value.
#[derive(Debug, Clone)]
pub struct GridEnsemble {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    maturities: Vec<f64>,
    h: Vec<f64>,
}

impl GridEnsemble {
    pub fn maturities(&self) -> &[f64] {
        &self.maturities
    }

    pub fn n_nodes(&self) -> usize {
        self.maturities.len()
    }

    /// `h(t_step, T_node)` on path `path`.
    pub fn h(&self, path: usize, step: usize, node: usize) -> f64 {
        let w = (self.n_steps + 1) * self.n_nodes();
        self.h[path * w + step * self.n_nodes() + node]
    }

    pub fn time(&self, step: usize) -> f64 {
        step as f64 * self.dt
    }

    /// Curve slice at one (path, step): values over all nodes.
    pub fn curve(&self, path: usize, step: usize) -> &[f64] {
        let w = (self.n_steps + 1) * self.n_nodes();
        let base = path * w + step * self.n_nodes();
        &self.h[base..base + self.n_nodes()]
    }
}

/// Simulates the arbitrage-free grid dynamics from `initial` (at t = 0).
///
/// Preconditions: the initial grid must be the uniform lattice
/// `0, dt, 2 dt, ...` (so every running time lies on a maturity node) and
/// must extend at least one node beyond the simulation horizon. Exceeding
/// `h_max` in absolute value, or the flow factor blowing up, aborts with an
/// explosion error carrying the blow-up time and path.
pub fn simulate_grid(
    initial: &CurveGrid,
    vol: &VolSpec,
    opts: &GridSimOptions,
    cfg: &SimConfig,
) -> Result<GridEnsemble> {
    cfg.validate()?;
    vol.validate()?;
    ensure_finite_scalar("h_max", opts.h_max)?;
    if let Some(mpr) = opts.market_price_of_risk {
        ensure_finite_scalar("market price of risk", mpr)?;
    }
    if cfg.record_stride != 1 {
        return Err(ModelError::invalid(
            "grid simulation records every step (record_stride must be 1)",
        ));
    }
    if initial.t() != 0.0 {
        return Err(ModelError::invalid("initial grid must start at t = 0"));
    }
    let m = initial.maturities().len();
    for (j, t_j) in initial.maturities().iter().enumerate() {
        if (t_j - j as f64 * cfg.dt).abs() > 1e-9 * t_j.max(1.0) {
            return Err(ModelError::invalid(format!(
                "maturity node {j} at {t_j} is off the dt = {} lattice",
                cfg.dt
            )));
        }
    }
    if cfg.n_steps + 1 > m {
        return Err(ModelError::invalid(format!(
            "horizon of {} steps needs at least {} maturity nodes, grid has {m}",
            cfg.n_steps,
            cfg.n_steps + 1
        )));
    }

    let dt = cfg.dt;
    let width = (cfg.n_steps + 1) * m;
    let mut h = vec![0.0; cfg.n_paths * width];
    let results: Vec<Result<()>> = h
        .par_chunks_mut(width)
        .enumerate()
        .map(|(path, out)| {
            let mut src = RngStream::new(cfg.seed, path as u64).normal_source();
            out[..m].copy_from_slice(initial.h_values());
            let mut row = initial.h_values().to_vec();
            for k in 0..cfg.n_steps {
                let t_next = (k + 1) as f64 * dt;
                let growth = if opts.zero_drift {
                    1.0
                } else {
                    let delta = 0.5 * dt * (row[k] + row[k + 1]);
                    let denom = 1.0 - delta;
                    if denom <= 0.0 {
                        return Err(ModelError::Explosion {
                            time: t_next,
                            path: Some(path),
                        });
                    }
                    1.0 / denom
                };
                let dw = if vol.is_zero() {
                    0.0
                } else {
                    src.next_normal() * dt.sqrt()
                };
                let mpr_dt = opts.market_price_of_risk.unwrap_or(0.0) * dt;
                for node in (k + 1)..m {
                    let sigma = vol.sigma(row[node]);
                    row[node] = row[node] * growth + sigma * (dw + mpr_dt);
                    if row[node].abs() > opts.h_max {
                        return Err(ModelError::Explosion {
                            time: t_next,
                            path: Some(path),
                        });
                    }
                }
                out[(k + 1) * m..(k + 2) * m].copy_from_slice(&row);
            }
            Ok(())
        })
        .collect();
    // First failing path in index order, so the error is thread-count
    // independent.
    for r in results {
        r?;
    }
    Ok(GridEnsemble {
        dt,
        n_steps: cfg.n_steps,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        maturities: initial.maturities().to_vec(),
        h,
    })
}

/// Induced volatility of T-bond returns: `v(t,T) = -int_t^T sigma(t,s) ds / P(t,T)`
/// with `P = 1 - int_t^T h(t,s) ds`, both integrals by trapezoid on the grid.
pub fn bond_return_vol(grid: &CurveGrid, vol: &VolSpec, maturity: f64) -> Result<f64> {
    vol.validate()?;
    let idx = grid
        .maturities()
        .iter()
        .position(|t| (t - maturity).abs() <= 1e-9 * maturity.abs().max(1.0))
        .ok_or_else(|| {
            ModelError::OutOfRange(format!("maturity {maturity} is not a grid node"))
        })?;
    if idx == 0 {
        return Ok(0.0);
    }
    let dts: Vec<f64> = grid.maturities()[..=idx]
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let mut sigma_int = 0.0;
    let mut h_int = 0.0;
    for (k, dt_k) in dts.iter().enumerate() {
        let (h0, h1) = (grid.h_values()[k], grid.h_values()[k + 1]);
        sigma_int += 0.5 * (vol.sigma(h0) + vol.sigma(h1)) * dt_k;
        h_int += 0.5 * (h0 + h1) * dt_k;
    }
    let p = 1.0 - h_int;
    if p <= 0.0 {
        return Err(ModelError::DegenerateCurve(format!(
            "bond price {p} at T = {maturity} is not positive"
        )));
    }
    Ok(-sigma_int / p)
}
