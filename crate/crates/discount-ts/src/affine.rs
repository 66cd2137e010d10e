//! Affine discount term structure.
//!
//! The discount-derivative curve is affine in the factors,
//! `h(t, t+x) = phi_0(x) + sum_i phi_i(x) Z_i`, and absence of arbitrage
//! forces a quadratic factor drift together with a linear ODE system for the
//! curve functions: `phibar'(x) = A phibar(x)`, `phibar(0) = gammabar`, so
//! `phibar(x) = e^{Ax} gammabar`. Bond prices and discounts are then linear
//! in the extended factor `(1, Z)` and forward rates are linear-rational.
//!
//! The consistency residual at the bottom of the module checks the general
//! (not necessarily affine) factor-model condition numerically; for affine
//! curves it is independent of the supplied diffusion, i.e. the volatility
//! stays unspanned.

use crate::error::{ensure_finite, ensure_finite_scalar, ModelError, Result};
use crate::numerics::{mat_exp, mat_vec, SquareMatrix};

/// Coefficients `(gamma_0..gamma_d, b, beta)` of a quadratic-drift affine model.
///
/// `beta` is d x d with `beta[(i, j)] = beta_ij` as it appears in the drift
/// `mu_i(z) = b_i + sum_j beta_ij z_j + z_i sum_j gamma_j z_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineParams {
    gamma0: f64,
    gamma: Vec<f64>,
    b: Vec<f64>,
    beta: SquareMatrix,
}

impl AffineParams {
    pub fn new(gamma0: f64, gamma: Vec<f64>, b: Vec<f64>, beta: SquareMatrix) -> Result<Self> {
        let d = gamma.len();
        if d == 0 {
            return Err(ModelError::invalid(
                "factor dimension must be >= 1 (use constant_rate for d = 0)",
            ));
        }
        if b.len() != d || beta.dim() != d {
            return Err(ModelError::DimensionMismatch(format!(
                "gamma has d = {d}, b has {} entries, beta is {}x{}",
                b.len(),
                beta.dim(),
                beta.dim()
            )));
        }
        ensure_finite_scalar("gamma0", gamma0)?;
        ensure_finite("gamma", &gamma)?;
        ensure_finite("b", &b)?;
        Ok(Self {
            gamma0,
            gamma,
            b,
            beta,
        })
    }

    /// Degenerate constant-rate model: d = 1 with gamma_1 = b_1 = beta_11 = 0,
    /// so the short rate is identically `gamma0`.
    pub fn constant_rate(gamma0: f64) -> Result<Self> {
        Self::new(gamma0, vec![0.0], vec![0.0], SquareMatrix::zeros(1))
    }

    pub fn dim(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn beta(&self) -> &SquareMatrix {
        &self.beta
    }

    /// Extended coefficient vector `(gamma_0, ..., gamma_d)`.
    pub fn gamma_bar(&self) -> Vec<f64> {
        let mut g = Vec::with_capacity(self.gamma.len() + 1);
        g.push(self.gamma0);
        g.extend_from_slice(&self.gamma);
        g
    }

    /// Quadratic factor drift `mu_i(z) = b_i + sum_j beta_ij z_j + z_i sum_j gamma_j z_j`.
    pub fn quadratic_drift(&self, z: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if z.len() != d {
            return Err(ModelError::DimensionMismatch(format!(
                "state has {} components, model has d = {d}",
                z.len()
            )));
        }
        let gz: f64 = self.gamma.iter().zip(z).map(|(g, zi)| g * zi).sum();
        let mut mu = vec![0.0; d];
        for i in 0..d {
            let lin: f64 = (0..d).map(|j| self.beta.get(i, j) * z[j]).sum();
            mu[i] = self.b[i] + lin + z[i] * gz;
        }
        Ok(mu)
    }
}

/// The (d+1) x (d+1) generator `A` of the curve ODE, together with
/// `gammabar = -A e0` (held explicitly; the identity is exact by layout).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    a: SquareMatrix,
    gamma_bar: Vec<f64>,
}

/// Assembles the generator: row 0 is `(-gamma_0, b_1, ..., b_d)` and row j
/// collects the coefficients of `phi_j'`, i.e. `A[j][0] = -gamma_j` and
/// `A[j][i] = beta_ij - delta_ij gamma_0` for i, j >= 1.
pub fn build_generator(p: &AffineParams) -> Result<GeneratorMatrix> {
    let d = p.dim();
    let a = SquareMatrix::from_fn(d + 1, |row, col| match (row, col) {
        (0, 0) => -p.gamma0,
        (0, j) => p.b[j - 1],
        (j, 0) => -p.gamma[j - 1],
        (j, i) => {
            let delta = if i == j { p.gamma0 } else { 0.0 };
            p.beta.get(i - 1, j - 1) - delta
        }
    });
    let gamma_bar = p.gamma_bar();
    debug_assert!(gamma_bar
        .iter()
        .enumerate()
        .all(|(j, g)| *g == -a.get(j, 0)));
    Ok(GeneratorMatrix { a, gamma_bar })
}

/// Extended factor state `(1, Z_1, ..., Z_d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedState {
    z_bar: Vec<f64>,
}

impl ExtendedState {
    /// Prefixes the factor values with the constant 1.
    pub fn new(z: &[f64]) -> Result<Self> {
        ensure_finite("z", z)?;
        let mut z_bar = Vec::with_capacity(z.len() + 1);
        z_bar.push(1.0);
        z_bar.extend_from_slice(z);
        Ok(Self { z_bar })
    }

    pub fn z_bar(&self) -> &[f64] {
        &self.z_bar
    }

    pub fn factors(&self) -> &[f64] {
        &self.z_bar[1..]
    }
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.a.dim() - 1
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.a
    }

    pub fn gamma_bar(&self) -> &[f64] {
        &self.gamma_bar
    }

    fn check_tau(&self, tau: f64) -> Result<()> {
        ensure_finite_scalar("tau", tau)?;
        if tau < 0.0 {
            return Err(ModelError::OutOfRange(format!(
                "time to maturity must be >= 0, got {tau}"
            )));
        }
        Ok(())
    }

    fn check_state(&self, s: &ExtendedState) -> Result<()> {
        if s.z_bar.len() != self.a.dim() {
            return Err(ModelError::DimensionMismatch(format!(
                "extended state has {} entries, generator is {}x{}",
                s.z_bar.len(),
                self.a.dim(),
                self.a.dim()
            )));
        }
        Ok(())
    }

    /// Curve functions `phibar(x) = e^{Ax} gammabar`.
    pub fn phi_bar(&self, x: f64) -> Result<Vec<f64>> {
        self.check_tau(x)?;
        mat_vec(&mat_exp(&self.a, x)?, &self.gamma_bar)
    }

    /// Primitive functions `Phibar(x) = (I - e^{Ax}) e0`.
    pub fn phi_primitive(&self, x: f64) -> Result<Vec<f64>> {
        self.check_tau(x)?;
        let e = mat_exp(&self.a, x)?;
        let mut col = e.column(0);
        for (j, v) in col.iter_mut().enumerate() {
            *v = if j == 0 { 1.0 - *v } else { -*v };
        }
        Ok(col)
    }

    /// Linear bond-price coefficients: `P(t, t+tau) = bond_weights(tau) . zbar`.
    /// This is the first column of `e^{A tau}`.
    pub fn bond_weights(&self, tau: f64) -> Result<Vec<f64>> {
        self.check_tau(tau)?;
        Ok(mat_exp(&self.a, tau)?.column(0))
    }

    /// Zero-coupon bond price `e0^T e^{A^T tau} zbar`.
    pub fn bond_price(&self, tau: f64, s: &ExtendedState) -> Result<f64> {
        self.check_state(s)?;
        let w = self.bond_weights(tau)?;
        Ok(dot(&w, &s.z_bar))
    }

    /// Discount `H = 1 - P = Phibar(tau)^T zbar`.
    pub fn discount(&self, tau: f64, s: &ExtendedState) -> Result<f64> {
        Ok(1.0 - self.bond_price(tau, s)?)
    }

    /// Short rate `r = gammabar^T zbar`.
    pub fn short_rate(&self, s: &ExtendedState) -> Result<f64> {
        self.check_state(s)?;
        Ok(dot(&self.gamma_bar, &s.z_bar))
    }

    /// Discount derivative `h(t, t+tau) = phibar(tau)^T zbar`.
    pub fn h_value(&self, tau: f64, s: &ExtendedState) -> Result<f64> {
        self.check_state(s)?;
        Ok(dot(&self.phi_bar(tau)?, &s.z_bar))
    }

    /// Linear-rational forward rate `f = (gammabar^T e^{A^T tau} zbar) / P`.
    ///
    /// Errors with a degenerate-curve report when the bond price is not
    /// positive.
    pub fn forward_rate(&self, tau: f64, s: &ExtendedState) -> Result<f64> {
        let p = self.bond_price(tau, s)?;
        if p <= 0.0 {
            return Err(ModelError::DegenerateCurve(format!(
                "bond price {p} at tau = {tau} is not positive"
            )));
        }
        Ok(self.h_value(tau, s)? / p)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Numerical residual of the factor-model consistency equation
///
/// `-d_x phi + mu . grad_z phi + 1/2 tr(c hess_z phi) - phi(x,z) phi(0,z)`
///
/// evaluated with central differences (relative step 1e-5). Zero (to
/// truncation error) for consistent models.
pub fn consistency_residual(
    phi: impl Fn(f64, &[f64]) -> f64,
    mu: impl Fn(&[f64]) -> Vec<f64>,
    diffusion: impl Fn(&[f64]) -> SquareMatrix,
    x: f64,
    z: &[f64],
) -> Result<f64> {
    const REL_STEP: f64 = 1e-5;
    let step = |v: f64| REL_STEP * v.abs().max(1.0);
    let d = z.len();

    let check = |v: f64| -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::invalid("non-finite curve evaluation"))
        }
    };

    let hx = step(x);
    let dphi_dx = (check(phi(x + hx, z))? - check(phi(x - hx, z))?) / (2.0 * hx);

    let mut zp = z.to_vec();
    let mut grad = vec![0.0; d];
    let mut hess = SquareMatrix::zeros(d);
    let phi_center = check(phi(x, z))?;
    for i in 0..d {
        let hi = step(z[i]);
        zp[i] = z[i] + hi;
        let up = check(phi(x, &zp))?;
        zp[i] = z[i] - hi;
        let dn = check(phi(x, &zp))?;
        zp[i] = z[i];
        grad[i] = (up - dn) / (2.0 * hi);
        hess.set(i, i, (up - 2.0 * phi_center + dn) / (hi * hi));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let (hi, hj) = (step(z[i]), step(z[j]));
            let mut eval = |si: f64, sj: f64| -> Result<f64> {
                zp[i] = z[i] + si * hi;
                zp[j] = z[j] + sj * hj;
                let v = check(phi(x, &zp));
                zp[i] = z[i];
                zp[j] = z[j];
                v
            };
            let mixed = (eval(1.0, 1.0)? - eval(1.0, -1.0)? - eval(-1.0, 1.0)?
                + eval(-1.0, -1.0)?)
                / (4.0 * hi * hj);
            hess.set(i, j, mixed);
            hess.set(j, i, mixed);
        }
    }

    let drift = mu(z);
    if drift.len() != d {
        return Err(ModelError::DimensionMismatch(format!(
            "drift returned {} components for d = {d}",
            drift.len()
        )));
    }
    let c = diffusion(z);
    if c.dim() != d {
        return Err(ModelError::DimensionMismatch(format!(
            "diffusion matrix is {}x{} for d = {d}",
            c.dim(),
            c.dim()
        )));
    }
    let mut trace_term = 0.0;
    for i in 0..d {
        for j in 0..d {
            trace_term += c.get(i, j) * hess.get(j, i);
        }
    }

    let residual =
        -dphi_dx + dot(&drift, &grad) + 0.5 * trace_term - phi_center * check(phi(0.0, z))?;
    check(residual)
}
