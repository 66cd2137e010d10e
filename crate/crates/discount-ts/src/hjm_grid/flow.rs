//! Closed-form deterministic curve flow.
//!
//! With zero volatility the curve `psi_t(x) = h(t, t+x)` evolves as
//! `psi_t(x) = psi_0(t + x) / (1 - int_0^t psi_0(s) ds)`, which exists
//! exactly as long as the initial curve integrates to less than one.

use crate::error::{ensure_finite_scalar, ModelError, Result};
use crate::hjm_grid::CurveGrid;
use crate::numerics::lerp;

type CurveFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial discount-derivative curve for the deterministic flow.
///
/// Carries the curve values and, when available, an exact primitive
/// `x -> int_0^x psi_0`. Sampled curves integrate by trapezoid on their own
/// lattice; bare closures fall back to a fine internal trapezoid.
pub struct Psi0 {
    value: CurveFn,
    primitive: Option<CurveFn>,
    sampled: Option<(Vec<f64>, Vec<f64>)>, // lattice offsets, cumulative trapezoid
}

impl Psi0 {
    /// Curve from a bare closure; integrals use a fine trapezoid fallback.
    pub fn from_fn(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Box::new(f),
            primitive: None,
            sampled: None,
        }
    }

    /// Curve with an exact primitive `prim(x) = int_0^x psi_0(s) ds`.
    pub fn with_primitive(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        prim: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Box::new(f),
            primitive: Some(Box::new(prim)),
            sampled: None,
        }
    }

    /// Exponential curve `scale * e^{-rate x}` with its exact primitive.
    pub fn exponential(scale: f64, rate: f64) -> Result<Self> {
        ensure_finite_scalar("scale", scale)?;
        ensure_finite_scalar("rate", rate)?;
        if rate <= 0.0 {
            return Err(ModelError::invalid("exponential curve needs rate > 0"));
        }
        Ok(Self::with_primitive(
            move |x| scale * (-rate * x).exp(),
            move |x| scale / rate * (1.0 - (-rate * x).exp()),
        ))
    }

    /// Flat curve `level` with primitive `level * x`.
    pub fn constant(level: f64) -> Result<Self> {
        ensure_finite_scalar("level", level)?;
        Ok(Self::with_primitive(move |_| level, move |x| level * x))
    }

    /// Sampled curve: values interpolate linearly, the primitive is the
    /// cumulative trapezoid on the sample lattice (exact at the nodes).
    pub fn from_grid(grid: &CurveGrid) -> Result<Self> {
        let offsets: Vec<f64> = grid
            .maturities()
            .iter()
            .map(|t| t - grid.t())
            .collect();
        if offsets[0] != 0.0 {
            return Err(ModelError::invalid(
                "sampled initial curve must start at offset 0",
            ));
        }
        let values = grid.h_values().to_vec();
        let mut cumulative = vec![0.0; offsets.len()];
        for k in 1..offsets.len() {
            cumulative[k] = cumulative[k - 1]
                + 0.5 * (values[k] + values[k - 1]) * (offsets[k] - offsets[k - 1]);
        }
        let (off_v, val_v) = (offsets.clone(), values);
        Ok(Self {
            value: Box::new(move |x| lerp(&off_v, &val_v, x).unwrap_or(f64::NAN)),
            primitive: None,
            sampled: Some((offsets, cumulative)),
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    /// `int_0^t psi_0(s) ds`.
    pub fn integral(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(0.0);
        }
        if let Some(prim) = &self.primitive {
            return Ok(prim(t));
        }
        if let Some((offsets, cumulative)) = &self.sampled {
            let base = lerp(offsets, cumulative, t)?;
            // lerp of a cumulative trapezoid isitself the trapezoid with a
            // linear-midpoint correction; at lattice nodes it is exact, and
            // the flow is evaluated on the lattice, so keep it simple.
            return Ok(base);
        }
        // Closure without a primitive: composite trapezoid on a fine lattice.
        let n = ((t / 1e-4).ceil() as usize).clamp(64, 1_000_000);
        let dt = t / n as f64;
        let mut acc = 0.0;
        let mut prev = self.value(0.0);
        for k in 1..=n {
            let cur = self.value(k as f64 * dt);
            acc += 0.5 * (prev + cur) * dt;
            prev = cur;
        }
        Ok(acc)
    }

    /// First time the cumulative integral reaches 1, bracketed in `[0, hi]`.
    fn critical_time(&self, hi: f64) -> f64 {
        let probe = |t: f64| self.integral(t).unwrap_or(f64::INFINITY) - 1.0;
        let mut lo = 0.0f64;
        let mut hi = hi;
        if probe(hi) < 0.0 {
            return f64::INFINITY;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if probe(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Deterministic flow `psi_t(x) = psi_0(t + x) / (1 - int_0^t psi_0)`.
///
/// Errors with an explosion (carrying the estimated critical time) once the
/// denominator is no longer positive.
pub fn spde_flow(psi0: &Psi0, t: f64, x: f64) -> Result<f64> {
    ensure_finite_scalar("t", t)?;
    ensure_finite_scalar("x", x)?;
    if t < 0.0 || x < 0.0 {
        return Err(ModelError::OutOfRange(format!(
            "flow needs t >= 0 and x >= 0 (got t = {t}, x = {x})"
        )));
    }
    let denom = 1.0 - psi0.integral(t)?;
    if denom <= 0.0 {
        return Err(ModelError::Explosion {
            time: psi0.critical_time(t),
            path: None,
        });
    }
    Ok(psi0.value(t + x) / denom)
}
