//! Gaussian kernels `exp(-(x - c)² / (2σ²))`, their design matrices and the
//! roughness matrix `Ω(j,k) = ∫ g″_j(x) g″_k(x) dx` over the real line.

use std::f64::consts::PI;

use crate::error::{Result, SpaghettiError};
use crate::linalg::{DenseMatrix, SymMatrix};

/// A set of Gaussian kernels sharing one width.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis {
    centers: Vec<f64>,
    sigma: f64,
}

impl KernelBasis {
    /// Centers must be finite and strictly increasing; `sigma` finite and positive.
    pub fn new(centers: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(SpaghettiError::config(format!(
                "kernel width must be finite and positive, got {sigma}"
            )));
        }
        if centers.iter().any(|c| !c.is_finite()) {
            return Err(SpaghettiError::degenerate("non-finite kernel center"));
        }
        if let Some(w) = centers.windows(2).find(|w| w[1] <= w[0]) {
            return Err(SpaghettiError::degenerate(format!(
                "kernel centers must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { centers, sigma })
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    #[inline]
    pub fn kernel_value(&self, k: usize, x: f64) -> f64 {
        let d = x - self.centers[k];
        (-d * d / (2.0 * self.sigma * self.sigma)).exp()
    }

    /// Second derivative of kernel `k` at `x`.
    pub fn kernel_second_derivative(&self, k: usize, x: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let d = x - self.centers[k];
        (d * d / (s2 * s2) - 1.0 / s2) * self.kernel_value(k, x)
    }

    /// `Σₖ weights[k]·g_k(x)`
    pub fn combine(&self, weights: &[f64], x: f64) -> f64 {
        debug_assert_eq!(weights.len(), self.centers.len());
        weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * self.kernel_value(k, x))
            .sum()
    }

    /// Matrix with entry `(j, k) = g_k(xs[j])`.
    pub fn design_matrix(&self, xs: &[f64]) -> DenseMatrix {
        DenseMatrix::from_fn(xs.len(), self.centers.len(), |j, k| {
            self.kernel_value(k, xs[j])
        })
    }

    /// Square kernel matrix at the centers themselves (symmetric, unit diagonal).
    pub fn gram_at_centers(&self) -> SymMatrix {
        SymMatrix::from_fn(self.centers.len(), |j, k| {
            if j == k {
                1.0
            } else {
                self.kernel_value(k, self.centers[j])
            }
        })
    }

    /// Closed-form roughness matrix of the kernels.
    pub fn roughness_matrix(&self) -> SymMatrix {
        SymMatrix::from_fn(self.centers.len(), |j, k| {
            roughness_entry(self.sigma, self.centers[j] - self.centers[k])
        })
    }

    /// Numerical `∫ g″_j g″_k dx` over `[min center − 12σ, max center + 12σ]`.
    ///
    /// Composite 10-point Gauss-Legendre on panels a quarter of a kernel width
    /// wide. Shares no arithmetic with [`roughness_entry`]; it exists to check it.
    pub fn roughness_quadrature_oracle(&self, j: usize, k: usize) -> f64 {
        let s = self.sigma;
        let (cj, ck) = (self.centers[j], self.centers[k]);
        let lo = self.centers[0] - 12.0 * s;
        let hi = self.centers[self.centers.len() - 1] + 12.0 * s;
        let s2 = s * s;
        let integrand = |x: f64| {
            let (dj, dk) = (x - cj, x - ck);
            let pj = dj * dj / (s2 * s2) - 1.0 / s2;
            let pk = dk * dk / (s2 * s2) - 1.0 / s2;
            // one exponential for the product keeps far tails from underflowing early
            pj * pk * (-(dj * dj + dk * dk) / (2.0 * s2)).exp()
        };
        let panels = ((hi - lo) / (0.25 * s)).ceil().max(1.0) as usize;
        composite_gauss_legendre(integrand, lo, hi, panels)
    }
}

/// `∫ g″(x − c_j) g″(x − c_k) dx` for two unit Gaussians of width `sigma`
/// whose centers differ by `separation`.
///
/// With `v = d²/(4σ²)` the integral is `√π/σ³ · e^{−v} · (3/4 − 3v + v²)`,
/// which follows from Parseval: `σ² ∫ ω⁴ e^{−σ²ω²} cos(ωd) dω`.
#[inline]
pub fn roughness_entry(sigma: f64, separation: f64) -> f64 {
    let v = separation * separation / (4.0 * sigma * sigma);
    PI.sqrt() / (sigma * sigma * sigma) * (-v).exp() * (0.75 - 3.0 * v + v * v)
}

const GL_ORDER: usize = 10;

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on Pₙ.
fn gauss_legendre_rule() -> ([f64; GL_ORDER], [f64; GL_ORDER]) {
    let n = GL_ORDER;
    let mut nodes = [0.0; GL_ORDER];
    let mut weights = [0.0; GL_ORDER];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * z * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn composite_gauss_legendre(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre_rule();
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        let mut acc = 0.0;
        for (t, w) in nodes.iter().zip(&weights) {
            acc += w * f(mid + 0.5 * h * t);
        }
        total += 0.5 * h * acc;
    }
    total
}
