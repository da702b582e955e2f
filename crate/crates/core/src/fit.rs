//! Fitting individual spaghetti functions.
//!
//! A spaghetti function is the least-squares line of its retained points plus
//! a weighted sum of Gaussian kernels centred on those points. For a fixed
//! roughness weight λ the kernel weights come from the penalized normal
//! equations `(KᵀK + λΩ)A = Kᵀr` and the shared width σ from a 1-D search;
//! λ itself is chosen to best predict the point that was left out.

use crate::error::{Result, SpaghettiError};
use crate::kernel::KernelBasis;
use crate::linalg::{dot, fit_least_squares_line, solve_spd, Line, SymMatrix};
use crate::search::{
    bisect_sign_change_log, golden_section_log, log_grid, log_grid_per_decade, Best,
};

/// Observations with strictly increasing, finite x.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    points: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub const MIN_LEN: usize = 3;

    /// Validates already ordered points.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < Self::MIN_LEN {
            return Err(SpaghettiError::degenerate(format!(
                "need at least {} points, got {}",
                Self::MIN_LEN,
                points.len()
            )));
        }
        if let Some((x, y)) = points
            .iter()
            .find(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(SpaghettiError::degenerate(format!(
                "non-finite point ({x}, {y})"
            )));
        }
        for w in points.windows(2) {
            if w[1].0 == w[0].0 {
                return Err(SpaghettiError::degenerate(format!(
                    "duplicate x = {}",
                    w[0].0
                )));
            }
            if w[1].0 < w[0].0 {
                return Err(SpaghettiError::degenerate(format!(
                    "x must be strictly increasing ({} follows {})",
                    w[1].0, w[0].0
                )));
            }
        }
        Ok(Self { points })
    }

    /// Sorts by x, then validates.
    pub fn from_unsorted(mut points: Vec<(f64, f64)>) -> Result<Self> {
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn xs(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    pub fn first_x(&self) -> f64 {
        self.points[0].0
    }

    pub fn last_x(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    pub fn span(&self) -> f64 {
        self.last_x() - self.first_x()
    }

    pub fn max_abs_y(&self) -> f64 {
        max_abs_y(&self.points)
    }

    /// All points except `i`.
    pub fn retained(&self, i: usize) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, p)| *p)
            .collect()
    }
}

/// Search-space settings for the σ and λ searches.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub lambda_points_per_decade: usize,
    /// σ grid starts at this multiple of the smallest adjacent x gap.
    pub sigma_lo_factor: f64,
    /// σ grid ends at this multiple of the x span.
    pub sigma_hi_factor: f64,
    pub sigma_grid_points: usize,
    /// Golden-section (or bisection) steps after each grid scan.
    pub refine_iterations: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda_lo: 1e-6,
            lambda_hi: 1e6,
            lambda_points_per_decade: 8,
            sigma_lo_factor: 0.25,
            sigma_hi_factor: 2.0,
            sigma_grid_points: 24,
            refine_iterations: 30,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.lambda_lo) || !positive(self.lambda_hi) {
            return Err(SpaghettiError::config(
                "lambda bounds must be finite and positive",
            ));
        }
        if self.lambda_lo >= self.lambda_hi {
            return Err(SpaghettiError::config(format!(
                "lambda lower bound {} must be below upper bound {}",
                self.lambda_lo, self.lambda_hi
            )));
        }
        if self.lambda_points_per_decade == 0 {
            return Err(SpaghettiError::config(
                "lambda points per decade must be positive",
            ));
        }
        if !positive(self.sigma_lo_factor) || !positive(self.sigma_hi_factor) {
            return Err(SpaghettiError::config(
                "sigma factors must be finite and positive",
            ));
        }
        if self.sigma_grid_points < 2 {
            return Err(SpaghettiError::config("sigma grid needs at least 2 points"));
        }
        Ok(())
    }

    /// The σ candidates for points with the given x geometry.
    pub fn sigma_grid(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let (lo, hi) = self.sigma_range(xs)?;
        Ok(log_grid(lo, hi, self.sigma_grid_points))
    }

    pub fn sigma_range(&self, xs: &[f64]) -> Result<(f64, f64)> {
        if xs.len() < 2 {
            return Err(SpaghettiError::degenerate(
                "sigma range needs at least 2 x values",
            ));
        }
        let min_gap = xs
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if min_gap.is_nan() || min_gap <= 0.0 {
            return Err(SpaghettiError::degenerate("x values must be distinct"));
        }
        let span = xs[xs.len() - 1] - xs[0];
        let lo = self.sigma_lo_factor * min_gap;
        let hi = self.sigma_hi_factor * span;
        if hi.is_nan() || lo.is_nan() || hi <= lo {
            return Err(SpaghettiError::config(format!(
                "empty sigma range [{lo}, {hi}]"
            )));
        }
        Ok((lo, hi))
    }

    pub fn lambda_grid(&self) -> Vec<f64> {
        log_grid_per_decade(
            self.lambda_lo,
            self.lambda_hi,
            self.lambda_points_per_decade,
        )
    }
}

/// One fitted model: `line(x) + Σₖ weights[k]·exp(-(x - cₖ)²/(2σ²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaghettiFunction {
    /// Index of the excluded point; `None` for fits on all points.
    pub left_out: Option<usize>,
    pub line: Line,
    pub basis: KernelBasis,
    pub weights: Vec<f64>,
    pub lambda: f64,
}

impl SpaghettiFunction {
    pub fn evaluate(&self, x: f64) -> f64 {
        self.line.eval(x) + self.basis.combine(&self.weights, x)
    }

    pub fn sigma(&self) -> f64 {
        self.basis.sigma()
    }

    /// `∫ f″(x)² dx`; the line contributes nothing.
    pub fn roughness(&self) -> f64 {
        self.basis
            .roughness_matrix()
            .quad_form(&self.weights)
            .max(0.0)
    }

    /// Sum of squared differences to `points`.
    pub fn deviation(&self, points: &[(f64, f64)]) -> f64 {
        points
            .iter()
            .map(|&(x, y)| (y - self.evaluate(x)).powi(2))
            .sum()
    }

    /// Deviation on `points` plus λ·roughness.
    pub fn objective(&self, points: &[(f64, f64)]) -> f64 {
        self.deviation(points) + self.lambda * self.roughness()
    }
}

/// Kernel weights minimizing `Σ (yₖ − f(xₖ))² + λ·AᵀΩA` for a fixed line, σ and λ.
pub fn solve_weights(
    retained: &[(f64, f64)],
    line: Line,
    sigma: f64,
    lambda: f64,
) -> Result<Vec<f64>> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(SpaghettiError::config(format!(
            "lambda must be finite and non-negative, got {lambda}"
        )));
    }
    let problem = PenalizedProblem::with_line(retained, line)?;
    let system = problem.system(sigma)?;
    Ok(system.solve(lambda)?.0)
}

/// Fits the line, then the (σ, A) pair minimizing the penalized objective for `lambda`.
///
/// The returned function has `left_out = None` and `lambda` set to the input.
pub fn fit_for_lambda(
    retained: &[(f64, f64)],
    lambda: f64,
    cfg: &FitConfig,
) -> Result<SpaghettiFunction> {
    cfg.validate()?;
    SigmaSearch::new(retained, cfg)?.fit(lambda)
}

/// The leave-one-out fit for point `i`, with λ chosen to minimize `|yᵢ − fᵢ(xᵢ)|`.
pub fn select_lambda_loo(
    series: &TimeSeries,
    i: usize,
    cfg: &FitConfig,
) -> Result<SpaghettiFunction> {
    LooProblem::new(series, i, cfg)?.select_lambda()
}

/// `h(x)`: interpolates every point, with σ chosen to minimize roughness.
pub fn least_rough_interpolator(series: &TimeSeries, cfg: &FitConfig) -> Result<SpaghettiFunction> {
    cfg.validate()?;
    let problem = PenalizedProblem::new(series.points())?;
    let tol = INTERPOLATION_TOL * (1.0 + series.max_abs_y());
    let scale = 1.0 + series.max_abs_y();
    let mut best = Best::new(TIE_ABS * scale * scale, TIE_REL);
    let mut last_err = None;

    let mut attempt = |sigma: f64, best: &mut Best<(KernelBasis, Vec<f64>)>| -> Option<f64> {
        match problem.interpolate(sigma, tol) {
            Ok((basis, weights, rough)) => {
                best.offer(sigma, rough, (basis, weights));
                Some(rough)
            }
            Err(e) => {
                last_err = Some(e);
                None
            }
        }
    };

    let grid = cfg.sigma_grid(&problem.xs)?;
    let mut best_idx = None;
    for (idx, &sigma) in grid.iter().enumerate() {
        let before = best.arg();
        attempt(sigma, &mut best);
        if best.arg() != before {
            best_idx = Some(idx);
        }
    }
    if let Some(idx) = best_idx {
        let (lo, hi) = bracket(&grid, idx);
        golden_section_log(|s| attempt(s, &mut best), lo, hi, cfg.refine_iterations);
    }
    let (_, _, (basis, weights)) = best.into_inner().ok_or_else(|| {
        last_err.unwrap_or_else(|| SpaghettiError::Numerical("no usable kernel width".into()))
    })?;
    Ok(SpaghettiFunction {
        left_out: None,
        line: problem.line,
        basis,
        weights,
        lambda: 0.0,
    })
}

/// Interpolation residual allowed for `h`, relative to `1 + max|y|`.
pub const INTERPOLATION_TOL: f64 = 1e-8;
/// Absolute tie tolerance on LOO error, relative to `1 + max|y|`.
pub const LAMBDA_TIE_TOL: f64 = 1e-12;
const TIE_ABS: f64 = 1e-24;
const TIE_REL: f64 = 1e-12;

fn max_abs_y(points: &[(f64, f64)]) -> f64 {
    points.iter().fold(0.0_f64, |m, p| m.max(p.1.abs()))
}

fn bracket(grid: &[f64], idx: usize) -> (f64, f64) {
    let lo = grid[idx.saturating_sub(1)];
    let hi = grid[(idx + 1).min(grid.len() - 1)];
    (lo, hi)
}

/// Retained points with their baseline line and residuals.
#[derive(Debug, Clone)]
struct PenalizedProblem {
    xs: Vec<f64>,
    residuals: Vec<f64>,
    line: Line,
}

impl PenalizedProblem {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        let line = fit_least_squares_line(points)?;
        Self::with_line(points, line)
    }

    fn with_line(points: &[(f64, f64)], line: Line) -> Result<Self> {
        if points.is_empty() {
            return Err(SpaghettiError::degenerate("no retained points"));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpaghettiError::degenerate(
                "retained x values must be distinct and increasing",
            ));
        }
        let residuals = points.iter().map(|&(x, y)| y - line.eval(x)).collect();
        Ok(Self {
            xs,
            residuals,
            line,
        })
    }

    fn system(&self, sigma: f64) -> Result<SigmaSystem> {
        let basis = KernelBasis::new(self.xs.clone(), sigma)?;
        let kernel = basis.gram_at_centers();
        let m = kernel.order();
        // K is symmetric, so KᵀK = K·K and Kᵀr = K·r
        let normal = SymMatrix::from_fn(m, |j, k| {
            (0..m).map(|p| kernel.get(p, j) * kernel.get(p, k)).sum()
        });
        let rhs = kernel.mul_vec(&self.residuals);
        let omega = basis.roughness_matrix();
        Ok(SigmaSystem {
            basis,
            kernel,
            normal,
            rhs,
            omega,
            residuals: self.residuals.clone(),
        })
    }

    /// Exact interpolation of the residuals; returns basis, weights and roughness.
    fn interpolate(&self, sigma: f64, tol: f64) -> Result<(KernelBasis, Vec<f64>, f64)> {
        let basis = KernelBasis::new(self.xs.clone(), sigma)?;
        let kernel = basis.gram_at_centers();
        let weights = solve_spd(&kernel, &self.residuals)?;
        let fitted = kernel.mul_vec(&weights);
        let worst = fitted
            .iter()
            .zip(&self.residuals)
            .fold(0.0_f64, |m, (f, r)| m.max((f - r).abs()));
        if worst.is_nan() || worst > tol {
            return Err(SpaghettiError::Numerical(format!(
                "interpolation residual {worst:e} at sigma {sigma}"
            )));
        }
        let rough = basis.roughness_matrix().quad_form(&weights).max(0.0);
        Ok((basis, weights, rough))
    }
}

/// Everything about the penalized system that depends on σ but not on λ.
#[derive(Debug, Clone)]
struct SigmaSystem {
    basis: KernelBasis,
    kernel: SymMatrix,
    normal: SymMatrix,
    rhs: Vec<f64>,
    omega: SymMatrix,
    residuals: Vec<f64>,
}

impl SigmaSystem {
    /// Weights and the achieved penalized objective.
    fn solve(&self, lambda: f64) -> Result<(Vec<f64>, f64)> {
        let m = self.normal.add_scaled(lambda, &self.omega);
        let weights = solve_spd(&m, &self.rhs)?;
        let fitted = self.kernel.mul_vec(&weights);
        let deviation: f64 = self
            .residuals
            .iter()
            .zip(&fitted)
            .map(|(r, f)| (r - f) * (r - f))
            .sum();
        let rough = dot(&weights, &self.omega.mul_vec(&weights)).max(0.0);
        let objective = deviation + lambda * rough;
        if !objective.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(SpaghettiError::Numerical(format!(
                "non-finite solve at sigma {}",
                self.basis.sigma()
            )));
        }
        Ok((weights, objective))
    }
}

/// σ search over a fixed set of retained points; grid systems are built once
/// and reused across λ values.
#[derive(Debug, Clone)]
pub struct SigmaSearch {
    problem: PenalizedProblem,
    grid: Vec<(f64, Option<SigmaSystem>)>,
    refine_iterations: usize,
    tie_abs: f64,
}

impl SigmaSearch {
    pub fn new(retained: &[(f64, f64)], cfg: &FitConfig) -> Result<Self> {
        if retained.len() < 2 {
            return Err(SpaghettiError::degenerate(format!(
                "a fit needs at least 2 retained points, got {}",
                retained.len()
            )));
        }
        let problem = PenalizedProblem::new(retained)?;
        let grid = cfg
            .sigma_grid(&problem.xs)?
            .into_iter()
            .map(|s| (s, problem.system(s).ok()))
            .collect();
        let scale = 1.0 + max_abs_y(retained);
        Ok(Self {
            problem,
            grid,
            refine_iterations: cfg.refine_iterations,
            tie_abs: TIE_ABS * scale * scale,
        })
    }

    pub fn line(&self) -> Line {
        self.problem.line
    }

    /// Best (σ, A) for `lambda`.
    pub fn fit(&self, lambda: f64) -> Result<SpaghettiFunction> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(SpaghettiError::config(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        let mut best: Best<(KernelBasis, Vec<f64>)> = Best::new(self.tie_abs, TIE_REL);
        let mut last_err = None;
        let mut best_idx = None;
        for (idx, (sigma, sys)) in self.grid.iter().enumerate() {
            let Some(sys) = sys else { continue };
            match sys.solve(lambda) {
                Ok((w, obj)) => {
                    if best.offer(*sigma, obj, (sys.basis.clone(), w)) {
                        best_idx = Some(idx);
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
        if let Some(idx) = best_idx {
            let sigmas: Vec<f64> = self.grid.iter().map(|g| g.0).collect();
            let (lo, hi) = bracket(&sigmas, idx);
            golden_section_log(
                |sigma| {
                    let sys = self.problem.system(sigma).ok()?;
                    let (w, obj) = sys.solve(lambda).ok()?;
                    best.offer(sigma, obj, (sys.basis, w));
                    Some(obj)
                },
                lo,
                hi,
                self.refine_iterations,
            );
        }
        let (_, _, (basis, weights)) = best.into_inner().ok_or_else(|| {
            last_err.unwrap_or_else(|| SpaghettiError::Numerical("no usable kernel width".into()))
        })?;
        Ok(SpaghettiFunction {
            left_out: None,
            line: self.problem.line,
            basis,
            weights,
            lambda,
        })
    }
}

/// The leave-one-out problem for one point of a series.
#[derive(Debug, Clone)]
pub struct LooProblem {
    index: usize,
    target: (f64, f64),
    search: SigmaSearch,
    lambda_grid: Vec<f64>,
    refine_iterations: usize,
    tie_tol: f64,
}

impl LooProblem {
    pub fn new(series: &TimeSeries, i: usize, cfg: &FitConfig) -> Result<Self> {
        cfg.validate()?;
        if i >= series.len() {
            return Err(SpaghettiError::config(format!(
                "left-out index {i} out of range for {} points",
                series.len()
            )));
        }
        let retained = series.retained(i);
        Ok(Self {
            index: i,
            target: series.points()[i],
            search: SigmaSearch::new(&retained, cfg)?,
            lambda_grid: cfg.lambda_grid(),
            refine_iterations: cfg.refine_iterations,
            tie_tol: LAMBDA_TIE_TOL * (1.0 + series.max_abs_y()),
        })
    }

    pub fn retained_line(&self) -> Line {
        self.search.line()
    }

    pub fn lambda_grid(&self) -> &[f64] {
        &self.lambda_grid
    }

    /// Tolerance within which two LOO errors count as tied.
    pub fn tie_tolerance(&self) -> f64 {
        self.tie_tol
    }

    /// Fit for `lambda` with `left_out` bound.
    pub fn fit(&self, lambda: f64) -> Result<SpaghettiFunction> {
        let mut f = self.search.fit(lambda)?;
        f.left_out = Some(self.index);
        Ok(f)
    }

    /// Signed prediction error `fᵢ(xᵢ) − yᵢ` at `lambda`.
    pub fn signed_error(&self, lambda: f64) -> Result<f64> {
        Ok(self.fit(lambda)?.evaluate(self.target.0) - self.target.1)
    }

    pub fn loo_error(&self, lambda: f64) -> Result<f64> {
        self.signed_error(lambda).map(f64::abs)
    }

    /// Grid scan over λ, then refinement: golden-section around the best grid
    /// point and bisection inside every bracket where the signed error
    /// changes sign.
    pub fn select_lambda(&self) -> Result<SpaghettiFunction> {
        let mut best: Best<SpaghettiFunction> = Best::new(self.tie_tol, 0.0);
        let mut last_err = None;
        let mut signed = Vec::with_capacity(self.lambda_grid.len());
        let mut best_idx = None;
        for (idx, &lambda) in self.lambda_grid.iter().enumerate() {
            match self.fit(lambda) {
                Ok(f) => {
                    let e = f.evaluate(self.target.0) - self.target.1;
                    if best.offer(lambda, e.abs(), f) {
                        best_idx = Some(idx);
                    }
                    signed.push(Some(e));
                }
                Err(err) => {
                    last_err = Some(err);
                    signed.push(None);
                }
            }
        }
        let Some(best_idx) = best_idx else {
            return Err(
                last_err.unwrap_or_else(|| SpaghettiError::Numerical("no usable lambda".into()))
            );
        };

        let probe = |lambda: f64, best: &mut Best<SpaghettiFunction>| -> Option<f64> {
            let f = self.fit(lambda).ok()?;
            let e = f.evaluate(self.target.0) - self.target.1;
            best.offer(lambda, e.abs(), f);
            Some(e)
        };

        let (lo, hi) = bracket(&self.lambda_grid, best_idx);
        golden_section_log(
            |l| probe(l, &mut best).map(f64::abs),
            lo,
            hi,
            self.refine_iterations,
        );
        for (idx, pair) in signed.windows(2).enumerate() {
            if let [Some(a), Some(b)] = *pair {
                if a * b < 0.0 {
                    bisect_sign_change_log(
                        |l| probe(l, &mut best),
                        self.lambda_grid[idx],
                        self.lambda_grid[idx + 1],
                        a,
                        self.refine_iterations,
                    );
                }
            }
        }
        let (_, _, f) = best.into_inner().expect("grid produced a candidate");
        Ok(f)
    }
}
