//! Shared numerical kernels: matrix exponential, seeded normal streams,
//! quadrature and interpolation. Everything here is a pure function of its
//! inputs and safe to call concurrently.

mod matrix;
mod quad;
mod rng;

pub use matrix::{mat_exp, mat_vec, SquareMatrix};
pub use quad::{lerp, trapezoid};
pub use rng::{gaussian_draws, NormalSource, RngStream};
