//! Arbitrage-free discount term-structure engine.
//!
//! Models the discount `H(t,T) = 1 - P(t,T)` through its maturity derivative
//! `h(t,T)`, with `P(t,T) = 1 - int_t^T h(t,s) ds`. Absence of arbitrage
//! pins the drift of `h` to `h(t,T) h(t,t)` (no volatility term), and
//! affine curve specifications `h = phibar(T-t) . (1, Z_t)` come with closed
//! forms: `phibar(x) = e^{Ax} gammabar`, bond prices linear in the factors,
//! forward rates linear-rational.
//!
//! Crate layout:
//!
//! - [`numerics`]: matrix exponential, seeded normal streams, quadrature,
//!   interpolation.
//! - [`affine`]: generator matrix, curve functions, bond/discount/rate
//!   closed forms and the factor-model consistency residual.
//! - [`factors`]: simplex-valued factor processes (nonnegative `U`, the
//!   simplex map `G`, direct `Z` dynamics, induced affine coefficients).
//! - [`hjm_grid`]: maturity-grid simulator of the arbitrage-free dynamics,
//!   the deterministic curve flow, and the bounded-rate toy model.
//! - [`validate`]: Monte Carlo checks of the pricing identities, drift
//!   condition, martingale property and bond-price positivity.
//! - [`cli`]: JSON config loading and the `curve`/`simulate`/`validate`/
//!   `spde` commands behind the `discount-ts` binary.
//!
//! The `examples/` directory has one runnable example per capability; the
//! acceptance suite lives in `tests/acceptance.rs`.

pub mod affine;
pub mod cli;
pub mod error;
pub mod factors;
pub mod hjm_grid;
pub mod numerics;
pub mod validate;

pub use error::{ModelError, Result};
