//! One-dimensional search helpers shared by the σ and λ searches.
//!
//! All searches run in log space over positive parameters and prefer the
//! larger argument when two objective values tie within tolerance.

/// Inclusive logarithmic grid of `count` points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 1);
    if count == 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / (count - 1) as f64;
    let mut g: Vec<f64> = (0..count).map(|i| (a + step * i as f64).exp()).collect();
    // exact endpoints
    g[0] = lo;
    g[count - 1] = hi;
    g
}

/// Inclusive logarithmic grid with (at least) `per_decade` points per decade.
pub fn log_grid_per_decade(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = (decades * per_decade as f64).round() as usize + 1;
    log_grid(lo, hi, count.max(2))
}

/// Best-so-far tracker with a tie tolerance that favours larger arguments.
#[derive(Debug, Clone)]
pub(crate) struct Best<T> {
    abs_tol: f64,
    rel_tol: f64,
    best: Option<(f64, f64, T)>,
}

impl<T> Best<T> {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            best: None,
        }
    }

    /// Offers `(arg, value)`; returns true if it became the incumbent.
    pub fn offer(&mut self, arg: f64, value: f64, payload: T) -> bool {
        if !value.is_finite() {
            return false;
        }
        let take = match &self.best {
            None => true,
            Some((a, v, _)) => {
                let tol = self.abs_tol + self.rel_tol * v.abs();
                value < v - tol || ((value - v).abs() <= tol && arg > *a)
            }
        };
        if take {
            self.best = Some((arg, value, payload));
        }
        take
    }

    pub fn arg(&self) -> Option<f64> {
        self.best.as_ref().map(|b| b.0)
    }

    pub fn into_inner(self) -> Option<(f64, f64, T)> {
        self.best
    }
}

/// Golden-section search for a minimum of `f` over `ln x ∈ [ln lo, ln hi]`.
///
/// `f` returns `None` for infeasible points, which are treated as +∞. Each
/// evaluation is reported through `f`; callers keep their own [`Best`].
pub(crate) fn golden_section_log(
    mut f: impl FnMut(f64) -> Option<f64>,
    lo: f64,
    hi: f64,
    iterations: usize,
) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    if b.is_nan() || a.is_nan() || b <= a || iterations == 0 {
        return;
    }
    let mut eval = |t: f64| f(t.exp()).unwrap_or(f64::INFINITY);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..iterations {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
    }
}

/// Bisection in log space on a sign change of `g` between `lo` and `hi`.
pub(crate) fn bisect_sign_change_log(
    mut g: impl FnMut(f64) -> Option<f64>,
    lo: f64,
    hi: f64,
    g_lo: f64,
    iterations: usize,
) {
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut ga = g_lo;
    for _ in 0..iterations {
        let m = 0.5 * (a + b);
        let Some(gm) = g(m.exp()) else { return };
        if gm == 0.0 {
            return;
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_and_density() {
        let g = log_grid_per_decade(1e-6, 1e6, 8);
        assert_eq!(g.len(), 97);
        assert_eq!(g[0], 1e-6);
        assert_eq!(*g.last().unwrap(), 1e6);
        assert!((g[8] / 1e-5 - 1.0).abs() < 1e-12);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn ties_prefer_larger_argument() {
        let mut b = Best::new(1e-12, 0.0);
        b.offer(1.0, 0.5, ());
        b.offer(3.0, 0.5 + 1e-13, ());
        assert_eq!(b.arg(), Some(3.0));
        b.offer(2.0, 0.5, ());
        assert_eq!(b.arg(), Some(3.0));
        b.offer(0.1, 0.4, ());
        assert_eq!(b.arg(), Some(0.1));
        assert!(!b.offer(9.0, f64::NAN, ()));
    }

    #[test]
    fn golden_finds_log_quadratic_minimum() {
        let mut best = Best::new(0.0, 0.0);
        golden_section_log(
            |x| {
                let v = (x.ln() - 2.0f64.ln()).powi(2);
                best.offer(x, v, ());
                Some(v)
            },
            0.5,
            16.0,
            60,
        );
        assert!((best.arg().unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn bisection_hits_root() {
        let mut best = Best::new(0.0, 0.0);
        bisect_sign_change_log(
            |x| {
                let v = x - 3.0;
                best.offer(x, v.abs(), ());
                Some(v)
            },
            1.0,
            10.0,
            -2.0,
            60,
        );
        assert!((best.arg().unwrap() - 3.0).abs() < 1e-12);
    }
}
