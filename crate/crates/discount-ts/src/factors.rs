//! Well-behaved simplex-valued factor processes.
//!
//! A nonnegative diffusion `U` with square-root volatility is mapped through
//! the diffeomorphism `G(u) = u / (1 + sum u)` onto the half-open solid
//! simplex `{z >= 0, sum z < 1}`. The transformed process `Z = G(U)` has
//! exactly the quadratic drift required by the affine consistency equation,
//! and its short rate `gammabar . (1, Z)` is uniformly bounded.
//!
//! Discretization is Euler-Maruyama with full truncation: square-root
//! arguments are clamped at zero, post-step states are projected onto the
//! domain, and every clamp is counted so discretization bias stays visible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affine::AffineParams;
use crate::error::{ensure_finite, ensure_finite_scalar, ModelError, Result};
use crate::numerics::{RngStream, SquareMatrix};

/// Parameters `(kappa, theta, q)` of the nonnegative factor SDE
/// `dU_i = (kappa_i U_i + theta_i (1 + sum U)) dt + q_i sqrt(U_i (1 + sum U)) dW_i`,
/// plus the free constant `gamma0` of the induced affine model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexFactorParams {
    pub kappa: Vec<f64>,
    pub theta: Vec<f64>,
    pub q: Vec<f64>,
    #[serde(default)]
    pub gamma0: f64,
}

impl SimplexFactorParams {
    pub fn new(kappa: Vec<f64>, theta: Vec<f64>, q: Vec<f64>, gamma0: f64) -> Result<Self> {
        let p = Self {
            kappa,
            theta,
            q,
            gamma0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.kappa.len();
        if d == 0 {
            return Err(ModelError::invalid("factor dimension must be >= 1"));
        }
        if self.theta.len() != d || self.q.len() != d {
            return Err(ModelError::DimensionMismatch(format!(
                "kappa/theta/q have lengths {}/{}/{}",
                d,
                self.theta.len(),
                self.q.len()
            )));
        }
        ensure_finite("kappa", &self.kappa)?;
        ensure_finite("theta", &self.theta)?;
        ensure_finite("q", &self.q)?;
        ensure_finite_scalar("gamma0", self.gamma0)?;
        if self.theta.iter().any(|t| *t < 0.0) {
            return Err(ModelError::invalid("theta_i must be >= 0"));
        }
        if self.q.iter().any(|q| *q < 0.0) {
            return Err(ModelError::invalid("q_i must be >= 0"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.kappa.len()
    }

    /// `theta_V = sum_j theta_j`.
    pub fn theta_total(&self) -> f64 {
        self.theta.iter().sum()
    }

    /// Affine-model coefficients induced by the transformed process:
    /// `b_i = theta_i`, `beta_ij = delta_ij (kappa_i - q_i^2 - theta_V)`,
    /// `gamma_j = q_j^2 - kappa_j`.
    ///
    /// The `-q_i^2` comes from the covariation of `U_i` with `1/(1 + sum U)`
    /// in the Ito expansion of the simplex map; the one-dimensional check is
    /// drift of `u/(1+u)` = `(1-z)(kappa z + theta - q^2 z)`.
    pub fn to_affine_params(&self) -> AffineParams {
        let d = self.dim();
        let theta_v = self.theta_total();
        let gamma: Vec<f64> = (0..d).map(|j| self.q[j] * self.q[j] - self.kappa[j]).collect();
        let beta = SquareMatrix::from_fn(d, |i, j| {
            if i == j {
                self.kappa[i] - self.q[i] * self.q[i] - theta_v
            } else {
                0.0
            }
        });
        AffineParams::new(self.gamma0, gamma, self.theta.clone(), beta)
            .expect("validated parameters always produce a valid affine model")
    }

    /// Drift of the simplex process `Z`, written out coefficient by
    /// coefficient. Identical (as algebra, not by construction) to
    /// `to_affine_params().quadratic_drift(z)`.
    pub fn z_drift(&self, z: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let theta_v = self.theta_total();
        let quad: f64 = (0..d)
            .map(|j| (self.q[j] * self.q[j] - self.kappa[j]) * z[j])
            .sum();
        (0..d)
            .map(|i| {
                self.theta[i]
                    + (self.kappa[i] - self.q[i] * self.q[i] - theta_v) * z[i]
                    + z[i] * quad
            })
            .collect()
    }
}

/// Maps `u >= 0` into the simplex: `z_i = u_i / (1 + sum u)`.
pub fn g_forward(u: &[f64]) -> Result<Vec<f64>> {
    ensure_finite("u", u)?;
    if u.iter().any(|v| *v < 0.0) {
        return Err(ModelError::invalid("g_forward requires u >= 0"));
    }
    let denom = 1.0 + u.iter().sum::<f64>();
    Ok(u.iter().map(|v| v / denom).collect())
}

/// Inverse map `u_i = z_i / (1 - sum z)`; requires `sum z < 1`.
///
/// Points within one machine epsilon of the boundary are rejected too: the
/// complement `1 - sum z` carries no significant digits there.
pub fn g_inverse(z: &[f64]) -> Result<Vec<f64>> {
    ensure_finite("z", z)?;
    if z.iter().any(|v| *v < 0.0) {
        return Err(ModelError::invalid("g_inverse requires z >= 0"));
    }
    let rem = 1.0 - z.iter().sum::<f64>();
    if rem <= f64::EPSILON {
        return Err(ModelError::Boundary(format!(
            "sum z = {} is at or beyond the simplex boundary",
            z.iter().sum::<f64>()
        )));
    }
    Ok(z.iter().map(|v| v / rem).collect())
}

/// Time-stepping controls shared by the path simulators.
///
/// `record_stride` keeps every k-th step (must divide `n_steps`); recording
/// every step for large ensembles is memory you usually do not want.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
}

fn default_stride() -> usize {
    1
}

impl SimConfig {
    pub fn new(dt: f64, n_steps: usize, n_paths: usize, seed: u64) -> Self {
        Self {
            dt,
            n_steps,
            n_paths,
            seed,
            record_stride: 1,
        }
    }

    pub fn with_record_stride(mut self, stride: usize) -> Self {
        self.record_stride = stride;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite_scalar("dt", self.dt)?;
        if self.dt <= 0.0 {
            return Err(ModelError::invalid("dt must be positive"));
        }
        if self.n_paths == 0 {
            return Err(ModelError::invalid("n_paths must be >= 1"));
        }
        if self.record_stride == 0
            || (self.n_steps > 0 && self.n_steps % self.record_stride != 0)
        {
            return Err(ModelError::invalid(format!(
                "record_stride {} must divide n_steps {}",
                self.record_stride, self.n_steps
            )));
        }
        Ok(())
    }

    fn n_recorded(&self) -> usize {
        if self.n_steps == 0 {
            1
        } else {
            self.n_steps / self.record_stride + 1
        }
    }
}

/// Seeded ensemble of factor paths on a uniform time grid.
///
/// States are recorded at `times()`; `clamp_counts` holds the number of
/// boundary clamps per path (component clamps plus simplex rescales).
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub dt: f64,
    pub n_steps: usize,
    pub n_paths: usize,
    pub seed: u64,
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    pub clamp_counts: Vec<u64>,
}

impl PathBundle {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Recorded time points (uniform multiples of `dt * record_stride`).
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_recorded(&self) -> usize {
        self.times.len()
    }

    /// State of `path` at recorded index `rec`.
    pub fn state(&self, path: usize, rec: usize) -> &[f64] {
        let w = self.n_recorded() * self.dim;
        let base = path * w + rec * self.dim;
        &self.states[base..base + self.dim]
    }

    pub fn terminal(&self, path: usize) -> &[f64] {
        self.state(path, self.n_recorded() - 1)
    }

    /// Clamped events as a fraction of simulated component-steps.
    pub fn clamp_fraction(&self) -> f64 {
        let total = (self.n_paths * self.n_steps * self.dim).max(1);
        self.clamp_counts.iter().sum::<u64>() as f64 / total as f64
    }

    /// Assembles a bundle from the raw recorded layout
    /// (`[n_paths][n_recorded][dim]`); for simulators with their own loop.
    pub(crate) fn from_parts(
        cfg: &SimConfig,
        dim: usize,
        states: Vec<f64>,
        clamp_counts: Vec<u64>,
    ) -> Result<Self> {
        cfg.validate()?;
        let n_rec = cfg.n_recorded();
        if states.len() != cfg.n_paths * n_rec * dim || clamp_counts.len() != cfg.n_paths {
            return Err(ModelError::DimensionMismatch(
                "raw path storage does not match the simulation shape".into(),
            ));
        }
        let times = (0..n_rec)
            .map(|k| k as f64 * cfg.dt * cfg.record_stride as f64)
            .collect();
        Ok(Self {
            dt: cfg.dt,
            n_steps: cfg.n_steps,
            n_paths: cfg.n_paths,
            seed: cfg.seed,
            dim,
            times,
            states,
            clamp_counts,
        })
    }
}

/// Runs independent paths in parallel and collects them in path order, so the
/// result is identical for any thread count.
fn run_paths(
    dim: usize,
    cfg: &SimConfig,
    step_fn: impl Fn(&mut [f64], &[f64], &mut u64) + Sync,
    init: &[f64],
) -> PathBundle {
    let n_rec = cfg.n_recorded();
    let mut states = vec![0.0; cfg.n_paths * n_rec * dim];
    let sqrt_dt = cfg.dt.sqrt();
    let clamp_counts: Vec<u64> = states
        .par_chunks_mut(n_rec * dim)
        .enumerate()
        .map(|(path, out)| {
            let mut src = RngStream::new(cfg.seed, path as u64).normal_source();
            let mut state = init.to_vec();
            let mut normals = vec![0.0; dim];
            let mut clamps = 0u64;
            out[..dim].copy_from_slice(&state);
            let mut rec = 1;
            for step in 1..=cfg.n_steps {
                for n in normals.iter_mut() {
                    *n = src.next_normal() * sqrt_dt;
                }
                step_fn(&mut state, &normals, &mut clamps);
                if step % cfg.record_stride == 0 {
                    out[rec * dim..(rec + 1) * dim].copy_from_slice(&state);
                    rec += 1;
                }
            }
            clamps
        })
        .collect();
    let times = (0..n_rec)
        .map(|k| k as f64 * cfg.dt * cfg.record_stride as f64)
        .collect();
    PathBundle {
        dt: cfg.dt,
        n_steps: cfg.n_steps,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        dim,
        times,
        states,
        clamp_counts,
    }
}

/// Euler-Maruyama paths of the nonnegative process `U` (full truncation).
pub fn simulate_u(p: &SimplexFactorParams, u0: &[f64], cfg: &SimConfig) -> Result<PathBundle> {
    p.validate()?;
    cfg.validate()?;
    ensure_finite("u0", u0)?;
    let d = p.dim();
    if u0.len() != d {
        return Err(ModelError::DimensionMismatch(format!(
            "u0 has {} components for d = {d}",
            u0.len()
        )));
    }
    if u0.iter().any(|v| *v < 0.0) {
        return Err(ModelError::invalid("u0 must be >= 0"));
    }
    let dt = cfg.dt;
    let step = move |u: &mut [f64], dw: &[f64], clamps: &mut u64| {
        let v = 1.0 + u.iter().sum::<f64>();
        for i in 0..d {
            let drift = p.kappa[i] * u[i] + p.theta[i] * v;
            let arg = (u[i] * v).max(0.0);
            u[i] += drift * dt + p.q[i] * arg.sqrt() * dw[i];
            if u[i] < 0.0 {
                u[i] = 0.0;
                *clamps += 1;
            }
        }
    };
    Ok(run_paths(d, cfg, step, u0))
}

const SIMPLEX_MARGIN: f64 = 1e-12;

/// Euler-Maruyama paths of the simplex process `Z` (full truncation, with
/// post-step projection onto the closed simplex).
pub fn simulate_z(p: &SimplexFactorParams, z0: &[f64], cfg: &SimConfig) -> Result<PathBundle> {
    p.validate()?;
    cfg.validate()?;
    ensure_finite("z0", z0)?;
    let d = p.dim();
    if z0.len() != d {
        return Err(ModelError::DimensionMismatch(format!(
            "z0 has {} components for d = {d}",
            z0.len()
        )));
    }
    if z0.iter().any(|v| *v < 0.0) || z0.iter().sum::<f64>() >= 1.0 {
        return Err(ModelError::Boundary(
            "z0 must lie in the open simplex {z >= 0, sum z < 1}".into(),
        ));
    }
    let dt = cfg.dt;
    let theta_v = p.theta_total();
    let step = move |z: &mut [f64], dw: &[f64], clamps: &mut u64| {
        let quad: f64 = (0..d)
            .map(|j| (p.q[j] * p.q[j] - p.kappa[j]) * z[j])
            .sum();
        // Shared noise term: the diffusion of component i is
        //   q_i (1 - z_i) sqrt(z_i) dW_i - z_i sum_{j != i} q_j sqrt(z_j) dW_j
        // = q_i sqrt(z_i) dW_i - z_i * sum_j q_j sqrt(z_j) dW_j.
        let sq: Vec<f64> = z.iter().map(|v| v.max(0.0).sqrt()).collect();
        let s_noise: f64 = (0..d).map(|j| p.q[j] * sq[j] * dw[j]).sum();
        for i in 0..d {
            let drift = p.theta[i]
                + (p.kappa[i] - p.q[i] * p.q[i] - theta_v) * z[i]
                + z[i] * quad;
            z[i] += drift * dt + p.q[i] * sq[i] * dw[i] - z[i] * s_noise;
        }
        let mut sum = 0.0;
        for v in z.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
                *clamps += 1;
            }
            sum += *v;
        }
        if sum > 1.0 {
            let scale = (1.0 - SIMPLEX_MARGIN) / sum;
            for v in z.iter_mut() {
                *v *= scale;
            }
            *clamps += 1;
        }
    };
    Ok(run_paths(d, cfg, step, z0))
}
