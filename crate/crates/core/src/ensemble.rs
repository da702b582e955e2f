//! The full set of leave-one-out functions for a series and their pointwise
//! statistics.

use rayon::prelude::*;

use crate::error::Result;
use crate::fit::{
    least_rough_interpolator, select_lambda_loo, FitConfig, SpaghettiFunction, TimeSeries,
};
use crate::linalg::{fit_least_squares_line, Line};

/// The two reference fits on all points.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparators {
    /// Least-squares line of every point.
    pub g: Line,
    /// Least rough interpolator of every point.
    pub h: SpaghettiFunction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub series: TimeSeries,
    /// `functions[i]` leaves out point `i`.
    pub functions: Vec<SpaghettiFunction>,
    pub comparators: Comparators,
}

impl Ensemble {
    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    /// Value of every function at `x`, in function order.
    pub fn values_at(&self, x: f64) -> Vec<f64> {
        self.functions.iter().map(|f| f.evaluate(x)).collect()
    }

    /// Average of the leave-one-out baseline lines; the far-field limit of μ(x).
    pub fn mean_line(&self) -> Line {
        let n = self.functions.len() as f64;
        let a = self.functions.iter().map(|f| f.line.a).sum::<f64>() / n;
        let b = self.functions.iter().map(|f| f.line.b).sum::<f64>() / n;
        Line::new(a, b)
    }

    pub fn max_sigma(&self) -> f64 {
        self.functions.iter().map(|f| f.sigma()).fold(0.0, f64::max)
    }
}

/// Fits all `n` leave-one-out functions (in parallel) plus both comparators.
pub fn build_ensemble(series: &TimeSeries, cfg: &FitConfig) -> Result<Ensemble> {
    cfg.validate()?;
    let functions = (0..series.len())
        .into_par_iter()
        .map(|i| select_lambda_loo(series, i, cfg))
        .collect::<Result<Vec<_>>>()?;
    let g = fit_least_squares_line(series.points())?;
    let h = least_rough_interpolator(series, cfg)?;
    Ok(Ensemble {
        series: series.clone(),
        functions,
        comparators: Comparators { g, h },
    })
}

/// Mean, population standard deviation and median of one set of values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointStats {
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

/// Statistics of `values`. They are sorted first, so the result does not
/// depend on input order at all, not even in the last bit.
pub fn pointwise_stats(values: &[f64]) -> PointStats {
    assert!(!values.is_empty(), "statistics of an empty set");
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let mid = v.len() / 2;
    let median = if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    };
    PointStats {
        mean,
        sd: var.sqrt(),
        median,
        min: v[0],
        max: v[v.len() - 1],
    }
}

/// μ(x) ± s(x) and the pointwise median over an evaluation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionBand {
    pub xs: Vec<f64>,
    pub mu: Vec<f64>,
    pub s: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub median: Vec<f64>,
}

impl PredictionBand {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

pub fn band(e: &Ensemble, xs: &[f64]) -> PredictionBand {
    let stats: Vec<PointStats> = xs
        .iter()
        .map(|&x| pointwise_stats(&e.values_at(x)))
        .collect();
    PredictionBand {
        xs: xs.to_vec(),
        mu: stats.iter().map(|s| s.mean).collect(),
        s: stats.iter().map(|s| s.sd).collect(),
        lower: stats.iter().map(|s| s.mean - s.sd).collect(),
        upper: stats.iter().map(|s| s.mean + s.sd).collect(),
        median: stats.iter().map(|s| s.median).collect(),
    }
}

/// `μ(x) − median(x)` at each grid point.
pub fn asymmetry_report(e: &Ensemble, xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .map(|&x| {
            let s = pointwise_stats(&e.values_at(x));
            s.mean - s.median
        })
        .collect()
}

pub const DEFAULT_GRID_COUNT: usize = 401;

/// `count` evenly spaced points from `start` to `end` inclusive.
pub fn linear_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2, "grid needs at least two points");
    let step = (end - start) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i == count - 1 {
                end
            } else {
                start + step * i as f64
            }
        })
        .collect()
}

/// Default display grid: half a span of margin on each side of the data.
pub fn default_grid(series: &TimeSeries) -> Vec<f64> {
    let (start, end) = default_grid_bounds(series);
    linear_grid(start, end, DEFAULT_GRID_COUNT)
}

pub fn default_grid_bounds(series: &TimeSeries) -> (f64, f64) {
    let span = series.span();
    (series.first_x() - 0.5 * span, series.last_x() + 0.5 * span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn skewed_values() {
        let s = pointwise_stats(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 100.0]);
        assert_eq!(s.median, 4.0);
        assert!((s.mean - 121.0 / 7.0).abs() < 1e-12);
        assert!((s.mean - s.median - 13.285714285714286).abs() < 1e-12);
    }

    #[test]
    fn even_count_median_averages_middle_pair() {
        assert_eq!(pointwise_stats(&[4.0, 1.0, 3.0, 2.0]).median, 2.5);
    }

    #[test]
    fn population_sd() {
        let s = pointwise_stats(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert!((s.sd - 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_shape() {
        let g = linear_grid(-1.0, 3.0, 5);
        assert_eq!(g, vec![-1.0, 0.0, 1.0, 2.0, 3.0]);
        let s = TimeSeries::new(vec![(1.0, 0.0), (2.0, 1.0), (5.0, 0.0)]).unwrap();
        let d = default_grid(&s);
        assert_eq!(d.len(), 401);
        assert_eq!((d[0], d[400]), (-1.0, 7.0));
    }

    #[test]
    fn collinear_ensemble_collapses_to_line() {
        let s = TimeSeries::new(vec![(0.0, 1.0), (1.0, 1.5), (2.0, 2.0), (3.0, 2.5)]).unwrap();
        let e = build_ensemble(&s, &FitConfig::default()).unwrap();
        assert_eq!(e.len(), 4);
        for (i, f) in e.functions.iter().enumerate() {
            assert_eq!(f.left_out, Some(i));
        }
        let xs = linear_grid(0.0, 3.0, 31);
        let b = band(&e, &xs);
        for (k, &x) in xs.iter().enumerate() {
            for v in e.values_at(x) {
                assert!((v - (1.0 + 0.5 * x)).abs() < 1e-6);
            }
            assert!(b.s[k] < 1e-9);
            assert!((b.mu[k] - b.median[k]).abs() < 1e-9);
        }
        assert!(asymmetry_report(&e, &xs).iter().all(|d| d.abs() < 1e-9));
    }

    #[test]
    fn minimal_ensemble() {
        let s = TimeSeries::new(vec![(0.0, 1.0), (1.0, 0.0), (2.0, 2.0)]).unwrap();
        let e = build_ensemble(&s, &FitConfig::default()).unwrap();
        assert_eq!(e.len(), 3);
    }

    proptest! {
        #[test]
        fn stats_invariants(values in prop::collection::vec(-1e3..1e3f64, 1..15), rot in 0usize..15) {
            let s = pointwise_stats(&values);
            prop_assert!(s.sd >= 0.0);
            prop_assert!(s.min <= s.median && s.median <= s.max);
            prop_assert!(s.mean - s.sd <= s.mean && s.mean <= s.mean + s.sd);
            let mut rotated = values.clone();
            let len = rotated.len();
            rotated.rotate_left(rot % len);
            prop_assert_eq!(pointwise_stats(&rotated), s);
        }
    }
}
