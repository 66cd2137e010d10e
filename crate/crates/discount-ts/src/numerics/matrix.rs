//! Dense square matrices and the matrix exponential.
//!
//! The exponential uses the [13/13] Padé approximant with scaling and
//! squaring (Higham 2005). Generator matrices here are small (d + 1 with
//! d ≲ 10), so a dense row-major layout and an O(n³) pivoted solve are all
//! that is needed.

use crate::error::{ensure_finite, ensure_finite_scalar, ModelError, Result};

/// Row-major square matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SquareMatrix {
    /// Builds a matrix from row-major entries. Fails on a length mismatch or
    /// any non-finite entry.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(ModelError::invalid("matrix dimension must be positive"));
        }
        if entries.len() != dim * dim {
            return Err(ModelError::DimensionMismatch(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        ensure_finite("matrix entry", &entries)?;
        Ok(Self { dim, entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.entries[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }

    /// Column of the matrix as an owned vector.
    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, col)).collect()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.dim {
            let s: f64 = (0..self.dim).map(|i| self.get(i, j).abs()).sum();
            best = best.max(s);
        }
        best
    }

    fn mul(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.entries[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        out
    }

    fn scale_in_place(&mut self, s: f64) {
        for v in &mut self.entries {
            *v *= s;
        }
    }

    /// self + c * rhs, elementwise.
    fn add_scaled(&self, c: f64, rhs: &Self) -> Self {
        debug_assert_eq!(self.dim, rhs.dim);
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + c * b)
            .collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    fn solve(&self, rhs: &Self) -> Result<Self> {
        let n = self.dim;
        let mut a = self.entries.clone();
        let mut x = rhs.entries.clone();
        for col in 0..n {
            let mut pivot = col;
            let mut best = a[col * n + col].abs();
            for r in col + 1..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    pivot = r;
                }
            }
            if best == 0.0 {
                return Err(ModelError::invalid(
                    "singular matrix in Pade denominator solve",
                ));
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot * n + j);
                    x.swap(col * n + j, pivot * n + j);
                }
            }
            let d = a[col * n + col];
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * n + col] / d;
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    a[r * n + j] -= f * a[col * n + j];
                    x[r * n + j] -= f * x[col * n + j];
                }
            }
        }
        for i in 0..n {
            let d = a[i * n + i];
            for j in 0..n {
                x[i * n + j] /= d;
            }
        }
        Ok(Self {
            dim: n,
            entries: x,
        })
    }
}

/// Matrix-vector product.
pub fn mat_vec(a: &SquareMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != a.dim {
        return Err(ModelError::DimensionMismatch(format!(
            "matrix is {}x{} but vector has length {}",
            a.dim,
            a.dim,
            v.len()
        )));
    }
    let n = a.dim;
    let mut out = vec![0.0; n];
    for i in 0..n {
        let row = &a.entries[i * n..(i + 1) * n];
        out[i] = row.iter().zip(v).map(|(m, x)| m * x).sum();
    }
    Ok(out)
}

// Numerator/denominator coefficients of the [13/13] Pade approximant to exp.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const PADE13_THETA: f64 = 5.371920351148152;

/// Matrix exponential `e^{A·x}`.
///
/// Scaling and squaring with the order-13 Pade approximant; relative entry
/// error is at machine-precision level for well-conditioned inputs.
pub fn mat_exp(a: &SquareMatrix, x: f64) -> Result<SquareMatrix> {
    ensure_finite_scalar("x", x)?;
    if !a.is_finite() {
        return Err(ModelError::invalid("matrix has non-finite entries"));
    }
    let n = a.dim;
    let mut m = a.clone();
    m.scale_in_place(x);

    let norm = m.one_norm();
    let squarings = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil() as u32
    } else {
        0
    };
    if squarings > 0 {
        m.scale_in_place(0.5f64.powi(squarings as i32));
    }

    let ident = SquareMatrix::identity(n);
    let m2 = m.mul(&m);
    let m4 = m2.mul(&m2);
    let m6 = m4.mul(&m2);

    // U = M (M6 (b13 M6 + b11 M4 + b9 M2) + b7 M6 + b5 M4 + b3 M2 + b1 I)
    let mut w = m6.clone();
    w.scale_in_place(PADE13[13]);
    let w = w.add_scaled(PADE13[11], &m4).add_scaled(PADE13[9], &m2);
    let u_inner = m6
        .mul(&w)
        .add_scaled(PADE13[7], &m6)
        .add_scaled(PADE13[5], &m4)
        .add_scaled(PADE13[3], &m2)
        .add_scaled(PADE13[1], &ident);
    let u = m.mul(&u_inner);

    // V = M6 (b12 M6 + b10 M4 + b8 M2) + b6 M6 + b4 M4 + b2 M2 + b0 I
    let mut w = m6.clone();
    w.scale_in_place(PADE13[12]);
    let w = w.add_scaled(PADE13[10], &m4).add_scaled(PADE13[8], &m2);
    let v = m6
        .mul(&w)
        .add_scaled(PADE13[6], &m6)
        .add_scaled(PADE13[4], &m4)
        .add_scaled(PADE13[2], &m2)
        .add_scaled(PADE13[0], &ident);

    // (V - U) R = (V + U)
    let denom = v.add_scaled(-1.0, &u);
    let numer = v.add_scaled(1.0, &u);
    let mut r = denom.solve(&numer)?;
    for _ in 0..squarings {
        r = r.mul(&r);
    }
    if !r.is_finite() {
        return Err(ModelError::invalid(
            "matrix exponential overflowed (argument too large)",
        ));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs_diff(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
        a.entries()
            .iter()
            .zip(b.entries())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let a = SquareMatrix::zeros(2);
        let e = mat_exp(&a, 1.0).unwrap();
        assert_eq!(e, SquareMatrix::identity(2));
    }

    #[test]
    fn exp_of_diagonal() {
        let a = SquareMatrix::from_fn(2, |i, j| {
            if i == j {
                if i == 0 {
                    0.3
                } else {
                    -1.7
                }
            } else {
                0.0
            }
        });
        let e = mat_exp(&a, 1.0).unwrap();
        assert!((e.get(0, 0) - 0.3f64.exp()).abs() < 1e-14);
        assert!((e.get(1, 1) - (-1.7f64).exp()).abs() < 1e-14);
        assert_eq!(e.get(0, 1), 0.0);
        assert_eq!(e.get(1, 0), 0.0);
    }

    #[test]
    fn exp_of_nilpotent_truncates() {
        let a = SquareMatrix::new(2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        for t in [0.25, 1.0, 7.5] {
            let e = mat_exp(&a, t).unwrap();
            assert!((e.get(0, 0) - 1.0).abs() < 1e-14);
            assert!((e.get(0, 1) - t).abs() < 1e-12 * t.max(1.0));
            assert!(e.get(1, 0).abs() < 1e-14);
            assert!((e.get(1, 1) - 1.0).abs() < 1e-14);
        }
    }

    /// Fixed-step RK4 integration of Y' = A Y, Y(0) = I. Test-only oracle,
    /// independent of the Pade path.
    fn rk4_exp(a: &SquareMatrix, x: f64, steps: usize) -> SquareMatrix {
        let n = a.dim();
        let h = x / steps as f64;
        let mul = |m: &SquareMatrix| -> SquareMatrix {
            let mut out = SquareMatrix::zeros(n);
            for i in 0..n {
                for k in 0..n {
                    let v = a.get(i, k);
                    for j in 0..n {
                        out.set(i, j, out.get(i, j) + v * m.get(k, j));
                    }
                }
            }
            out
        };
        let mut y = SquareMatrix::identity(n);
        for _ in 0..steps {
            let k1 = mul(&y);
            let k2 = mul(&y.add_scaled(h / 2.0, &k1));
            let k3 = mul(&y.add_scaled(h / 2.0, &k2));
            let k4 = mul(&y.add_scaled(h, &k3));
            y = y
                .add_scaled(h / 6.0, &k1)
                .add_scaled(h / 3.0, &k2)
                .add_scaled(h / 3.0, &k3)
                .add_scaled(h / 6.0, &k4);
        }
        y
    }

    #[test]
    fn exp_matches_ode_oracle() {
        let a = SquareMatrix::new(2, vec![0.0, 0.0, -1.0, -0.05]).unwrap();
        let e = mat_exp(&a, 2.0).unwrap();
        // 2e5 RK4 steps over x = 2 leaves the oracle error far below 1e-10.
        let oracle = rk4_exp(&a, 2.0, 200_000);
        assert!(
            max_abs_diff(&e, &oracle) < 1e-10,
            "diff = {}",
            max_abs_diff(&e, &oracle)
        );
    }

    #[test]
    fn exp_derivative_matches_generator() {
        let a = SquareMatrix::new(
            3,
            vec![0.1, -0.4, 0.2, 0.7, -0.3, 0.05, -0.2, 0.6, -0.9],
        )
        .unwrap();
        let v = [0.3, -1.2, 0.8];
        let x = 1.7;
        let h = 1e-6;
        let plus = mat_vec(&mat_exp(&a, x + h).unwrap(), &v).unwrap();
        let minus = mat_vec(&mat_exp(&a, x - h).unwrap(), &v).unwrap();
        let exact = mat_vec(&a, &mat_vec(&mat_exp(&a, x).unwrap(), &v).unwrap()).unwrap();
        let scale = exact.iter().map(|e| e.abs()).fold(1e-12, f64::max);
        for i in 0..3 {
            let fd = (plus[i] - minus[i]) / (2.0 * h);
            assert!(
                ((fd - exact[i]) / scale).abs() < 1e-6,
                "component {i}: fd={fd}, exact={}",
                exact[i]
            );
        }
    }

    #[test]
    fn rejects_non_finite() {
        let a = SquareMatrix::new(2, vec![0.0, f64::NAN, 0.0, 0.0]);
        assert!(a.is_err());
        let b = SquareMatrix::zeros(2);
        assert!(mat_exp(&b, f64::INFINITY).is_err());
    }

    #[test]
    fn mat_vec_basics() {
        let id = SquareMatrix::identity(3);
        let v = vec![1.5, -2.0, 0.25];
        assert_eq!(mat_vec(&id, &v).unwrap(), v);
        let z = SquareMatrix::zeros(3);
        assert_eq!(mat_vec(&z, &v).unwrap(), vec![0.0; 3]);
        let m = SquareMatrix::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(mat_vec(&m, &[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
        assert!(mat_vec(&m, &[1.0]).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn small_matrix() -> impl Strategy<Value = SquareMatrix> {
            proptest::collection::vec(-1.0f64..1.0, 16)
                .prop_map(|v| SquareMatrix::new(4, v).unwrap())
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn semigroup_property(a in small_matrix(), x in 0.0f64..5.0, y in 0.0f64..5.0) {
                let exy = mat_exp(&a, x + y).unwrap();
                let ex = mat_exp(&a, x).unwrap();
                let ey = mat_exp(&a, y).unwrap();
                let mut prod = SquareMatrix::zeros(4);
                for i in 0..4 {
                    for j in 0..4 {
                        let s: f64 = (0..4).map(|k| ex.get(i, k) * ey.get(k, j)).sum();
                        prod.set(i, j, s);
                    }
                }
                let scale = exy.entries().iter().map(|v| v.abs()).fold(1.0, f64::max);
                for (p, e) in prod.entries().iter().zip(exy.entries()) {
                    prop_assert!((p - e).abs() <= 1e-10 * scale, "p={p}, e={e}, scale={scale}");
                }
            }

            #[test]
            fn exp_at_zero_is_identity(a in small_matrix()) {
                let e = mat_exp(&a, 0.0).unwrap();
                prop_assert_eq!(e, SquareMatrix::identity(4));
            }
        }
    }
}
