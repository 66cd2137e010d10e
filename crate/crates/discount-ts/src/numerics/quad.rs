//! Trapezoid quadrature on uniform grids and linear interpolation.

use crate::error::{ensure_finite_scalar, ModelError, Result};

/// Trapezoidal integral of uniformly spaced samples with spacing `dt`.
pub fn trapezoid(values: &[f64], dt: f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(ModelError::invalid(
            "trapezoid needs at least 2 samples",
        ));
    }
    ensure_finite_scalar("dt", dt)?;
    if dt <= 0.0 {
        return Err(ModelError::invalid("trapezoid spacing must be positive"));
    }
    let sum: f64 = values.iter().sum();
    Ok(dt * (sum - 0.5 * (values[0] + values[values.len() - 1])))
}

/// Piecewise-linear interpolation of `values` sampled at `grid`.
///
/// `grid` must be strictly increasing and `x` must lie within its range.
pub fn lerp(grid: &[f64], values: &[f64], x: f64) -> Result<f64> {
    if grid.len() != values.len() || grid.len() < 2 {
        return Err(ModelError::DimensionMismatch(format!(
            "grid has {} abscissae, values has {} (need matching lengths >= 2)",
            grid.len(),
            values.len()
        )));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModelError::invalid("grid must be strictly increasing"));
    }
    let (first, last) = (grid[0], grid[grid.len() - 1]);
    if !(first..=last).contains(&x) {
        return Err(ModelError::OutOfRange(format!(
            "x = {x} outside grid range [{first}, {last}]"
        )));
    }
    // partition_point returns the first index with grid[i] > x.
    let hi = grid.partition_point(|&g| g <= x);
    if hi == grid.len() {
        return Ok(values[values.len() - 1]);
    }
    if hi == 0 {
        return Ok(values[0]);
    }
    let (x0, x1) = (grid[hi - 1], grid[hi]);
    let w = (x - x0) / (x1 - x0);
    Ok(values[hi - 1] + w * (values[hi] - values[hi - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_integral() {
        let v = vec![3.0; 9];
        // 8 steps of width 0.5
        assert_eq!(trapezoid(&v, 0.5).unwrap(), 3.0 * 8.0 * 0.5);
    }

    #[test]
    fn linear_ramp_is_exact() {
        let v = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        assert_eq!(trapezoid(&v, 0.25).unwrap(), 0.5);
    }

    #[test]
    fn exponential_integral() {
        let dt = 1e-3;
        let n = 1001;
        let v: Vec<f64> = (0..n).map(|k| (k as f64 * dt).exp()).collect();
        let exact = 1f64.exp() - 1.0;
        assert!((trapezoid(&v, dt).unwrap() - exact).abs() < 1e-6);
    }

    #[test]
    fn too_few_samples() {
        assert!(trapezoid(&[1.0], 0.1).is_err());
    }

    #[test]
    fn lerp_hits_nodes_and_midpoints() {
        let grid = [0.0, 1.0, 3.0];
        let vals = [0.0, 2.0, -2.0];
        assert_eq!(lerp(&grid, &vals, 1.0).unwrap(), 2.0);
        assert_eq!(lerp(&grid, &vals, 0.5).unwrap(), 1.0);
        assert_eq!(lerp(&grid, &vals, 3.0).unwrap(), -2.0);
        assert!(lerp(&grid, &vals, 3.5).is_err());
        assert!(lerp(&grid, &vals, -0.1).is_err());
    }

    #[test]
    fn lerp_reproduces_linear_functions() {
        let grid: Vec<f64> = (0..11).map(|k| k as f64 * 0.37).collect();
        let vals: Vec<f64> = grid.iter().map(|x| 2.5 * x - 1.0).collect();
        for &x in &[0.0, 0.17, 1.11, 2.96, 3.7] {
            let y = lerp(&grid, &vals, x).unwrap();
            assert!((y - (2.5 * x - 1.0)).abs() < 1e-12);
        }
    }
}
