//! Small dense linear algebra: the least-squares line, symmetric matrices and
//! Cholesky solves.
//!
//! Everything here is sized for short series (a handful to a few hundred
//! points), so plain row-major `Vec<f64>` storage is used throughout.

use crate::error::{Result, SpaghettiError};

/// Straight line `a + b·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    /// Intercept.
    pub a: f64,
    /// Slope.
    pub b: f64,
}

impl Line {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.a + self.b * x
    }
}

/// Ordinary least-squares line through `points`.
///
/// Solves the 2×2 normal equations in centered form, which is exact for the
/// same minimizer and avoids the cancellation of raw power sums when x is far
/// from the origin.
pub fn fit_least_squares_line(points: &[(f64, f64)]) -> Result<Line> {
    if points.len() < 2 {
        return Err(SpaghettiError::degenerate(format!(
            "least-squares line needs at least 2 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(SpaghettiError::degenerate("non-finite coordinate"));
    }
    let n = points.len() as f64;
    let x_mean = points.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in points {
        let dx = x - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    let x_scale = points
        .iter()
        .fold(0.0_f64, |m, p| m.max(p.0.abs()))
        .max(1.0);
    if sxx <= (f64::EPSILON * x_scale).powi(2) * n {
        return Err(SpaghettiError::degenerate(
            "least-squares line needs at least two distinct x values",
        ));
    }
    let b = sxy / sxx;
    Ok(Line::new(y_mean - b * x_mean, b))
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    /// `selfᵀ·v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows, "dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (r, &vr) in v.iter().enumerate() {
            for (o, &m) in out.iter_mut().zip(self.row(r)) {
                *o += m * vr;
            }
        }
        out
    }

    /// The Gram matrix `selfᵀ·self`.
    pub fn gram(&self) -> SymMatrix {
        SymMatrix::from_fn(self.cols, |j, k| {
            (0..self.rows)
                .map(|r| self.get(r, j) * self.get(r, k))
                .sum()
        })
    }
}

/// Symmetric matrix with both triangles stored; every write is mirrored so
/// `get(j, k) == get(k, j)` holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    order: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds the matrix from `f(j, k)` evaluated on the upper triangle only.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(order);
        for j in 0..order {
            for k in j..order {
                m.set(j, k, f(j, k));
            }
        }
        m
    }

    /// Builds from full row-major rows; only the upper triangle is read.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        Self::from_fn(rows.len(), |j, k| rows[j][k])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.data[j * self.order + k]
    }

    #[inline]
    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        self.data[j * self.order + k] = v;
        self.data[k * self.order + j] = v;
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.order, "dimension mismatch");
        (0..self.order)
            .map(|j| dot(&self.data[j * self.order..(j + 1) * self.order], v))
            .collect()
    }

    /// `vᵀ·M·v`
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn mean_diagonal(&self) -> f64 {
        if self.order == 0 {
            0.0
        } else {
            self.trace() / self.order as f64
        }
    }

    pub fn add_diagonal(&mut self, eps: f64) {
        for i in 0..self.order {
            self.data[i * self.order + i] += eps;
        }
    }

    /// `self + scale·other`
    pub fn add_scaled(&self, scale: f64, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.order, other.order, "dimension mismatch");
        SymMatrix {
            order: self.order,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + scale * b)
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Lower-triangular Cholesky factor `L` with `M = L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    order: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factorizes `m`, failing on the first pivot that is not strictly
    /// positive (or not finite).
    pub fn factor(m: &SymMatrix) -> Result<Self> {
        let n = m.order();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut d = m.get(j, j);
            for p in 0..j {
                d -= l[j * n + p] * l[j * n + p];
            }
            if !d.is_finite() || d <= 0.0 {
                return Err(SpaghettiError::NotPositiveDefinite { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in j + 1..n {
                let mut s = m.get(i, j);
                for p in 0..j {
                    s -= l[i * n + p] * l[j * n + p];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { order: n, lower: l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.order;
        assert_eq!(rhs.len(), n, "dimension mismatch");
        let l = &self.lower;
        let mut z = rhs.to_vec();
        for i in 0..n {
            let mut s = z[i];
            for p in 0..i {
                s -= l[i * n + p] * z[p];
            }
            z[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for p in i + 1..n {
                s -= l[p * n + i] * z[p];
            }
            z[i] = s / l[i * n + i];
        }
        z
    }
}

/// Relative size of the diagonal jitter added when a first factorization fails.
pub const JITTER_RELATIVE: f64 = 1e-10;

/// Solves `m·v = rhs` for symmetric positive-definite `m`.
///
/// On a nonpositive pivot the system is retried once with
/// `JITTER_RELATIVE · mean(diag m)` added to the diagonal; a second failure
/// is returned as [`SpaghettiError::NotPositiveDefinite`].
pub fn solve_spd(m: &SymMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != m.order() {
        return Err(SpaghettiError::config(format!(
            "right-hand side has length {} but matrix order is {}",
            rhs.len(),
            m.order()
        )));
    }
    match Cholesky::factor(m) {
        Ok(c) => Ok(c.solve(rhs)),
        Err(SpaghettiError::NotPositiveDefinite { .. }) => {
            let mut jittered = m.clone();
            jittered.add_diagonal(JITTER_RELATIVE * m.mean_diagonal().abs());
            Ok(Cholesky::factor(&jittered)?.solve(rhs))
        }
        Err(e) => Err(e),
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norm_inf(v: &[f64]) -> f64 {
        v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn collinear_points_give_exact_line() {
        let l = fit_least_squares_line(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!(close(l.a, 1.0, 1e-14) && close(l.b, 2.0, 1e-14), "{l:?}");
    }

    #[test]
    fn line_matches_hand_solved_normal_equations() {
        // Σx=3, Σx²=5, Σy=3, Σxy=6:  3a + 3b = 3,  3a + 5b = 6  →  b = 1.5, a = -0.5
        let l = fit_least_squares_line(&[(0.0, 0.0), (1.0, 0.0), (2.0, 3.0)]).unwrap();
        assert!(close(l.a, -0.5, 1e-14) && close(l.b, 1.5, 1e-14), "{l:?}");
    }

    #[test]
    fn vertical_data_is_degenerate() {
        let err = fit_least_squares_line(&[(1.0, 4.0), (1.0, 6.0)]).unwrap_err();
        assert!(matches!(err, SpaghettiError::DegenerateInput(_)));
        assert!(fit_least_squares_line(&[(1.0, 4.0)]).is_err());
    }

    #[test]
    fn solve_identity_and_diagonal() {
        let v = solve_spd(&SymMatrix::identity(2), &[3.0, -1.0]).unwrap();
        assert_eq!(v, vec![3.0, -1.0]);
        let m = SymMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        let v = solve_spd(&m, &[2.0, 8.0]).unwrap();
        assert!(close(v[0], 1.0, 1e-15) && close(v[1], 2.0, 1e-15));
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn solve_random_spd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = DenseMatrix::from_fn(5, 5, |_, _| rng.gen_range(-1.0..1.0));
        let mut m = b.gram();
        m.add_diagonal(0.1);
        let rhs: Vec<f64> = (0..5).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let v = solve_spd(&m, &rhs).unwrap();
        // residual by direct multiplication, element by element
        let mut worst: f64 = 0.0;
        for j in 0..5 {
            let mut s = 0.0;
            for k in 0..5 {
                s += m.get(j, k) * v[k];
            }
            worst = worst.max((s - rhs[j]).abs());
        }
        assert!(worst <= 1e-8 * (1.0 + norm_inf(&rhs)), "residual {worst}");
    }

    #[test]
    fn indefinite_matrix_is_rejected_after_jitter() {
        let m = SymMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            Cholesky::factor(&m),
            Err(SpaghettiError::NotPositiveDefinite { pivot: 1, .. })
        ));
        assert!(matches!(
            solve_spd(&m, &[1.0, 1.0]),
            Err(SpaghettiError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn jitter_rescues_semidefinite_matrix() {
        // rank one: pivot 1 is exactly zero
        let m = SymMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(Cholesky::factor(&m).is_err());
        let v = solve_spd(&m, &[1.0, 1.0]).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn mismatched_rhs_is_config_error() {
        assert!(matches!(
            solve_spd(&SymMatrix::identity(2), &[1.0]),
            Err(SpaghettiError::InvalidConfig(_))
        ));
    }

    #[test]
    fn sym_matrix_mirrors_writes() {
        let mut m = SymMatrix::zeros(3);
        m.set(0, 2, 7.0);
        assert_eq!(m.get(2, 0), 7.0);
        let f = SymMatrix::from_fn(3, |j, k| (j * 10 + k) as f64);
        for j in 0..3 {
            for k in 0..3 {
                assert_eq!(f.get(j, k), f.get(k, j));
            }
        }
    }

    proptest! {
        #[test]
        fn residuals_are_orthogonal_to_design(
            ys in prop::collection::vec(-100.0..100.0f64, 3..12),
            x0 in -50.0..50.0f64,
        ) {
            let pts: Vec<(f64, f64)> =
                ys.iter().enumerate().map(|(i, &y)| (x0 + i as f64 * 0.7, y)).collect();
            let l = fit_least_squares_line(&pts).unwrap();
            let scale = pts.iter().map(|p| p.1.abs()).sum::<f64>().max(1.0);
            let r: Vec<f64> = pts.iter().map(|&(x, y)| y - l.eval(x)).collect();
            let s0: f64 = r.iter().sum();
            let s1: f64 = r.iter().zip(&pts).map(|(ri, p)| ri * p.0).sum();
            let x_scale = pts.iter().map(|p| p.0.abs()).fold(1.0, f64::max);
            prop_assert!(s0.abs() <= 1e-9 * scale);
            prop_assert!(s1.abs() <= 1e-9 * scale * x_scale);
        }

        #[test]
        fn constant_shift_moves_only_intercept(
            ys in prop::collection::vec(-100.0..100.0f64, 3..10),
            c in -1e3..1e3f64,
        ) {
            let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64, y)).collect();
            let shifted: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, y + c)).collect();
            let l0 = fit_least_squares_line(&pts).unwrap();
            let l1 = fit_least_squares_line(&shifted).unwrap();
            let scale = 1.0 + ys.iter().map(|y| y.abs()).fold(0.0, f64::max) + c.abs();
            prop_assert!((l1.a - l0.a - c).abs() <= 1e-9 * scale);
            prop_assert!((l1.b - l0.b).abs() <= 1e-9 * scale);
        }
    }
}
