//! Spaghetti prediction for short time series.
//!
//! Each of the `n` points of a series is left out in turn. The remaining
//! points get a least-squares line plus a sum of Gaussian kernels whose
//! weights and shared width minimize squared deviation plus λ times
//! roughness (the integrated squared second derivative), and λ is picked so
//! the fit predicts the excluded point as closely as possible. The spread of
//! the resulting `n` functions gives a prediction band that is tight near the
//! data, wide away from it, and not forced to be symmetric.
//!
//! ```
//! use spaghetti_core::{band, build_ensemble, default_grid, FitConfig, TimeSeries};
//!
//! let series = TimeSeries::new(vec![(0.0, 1.0), (1.0, 2.5), (2.0, 2.0), (3.0, 3.8)]).unwrap();
//! let ensemble = build_ensemble(&series, &FitConfig::default()).unwrap();
//! let b = band(&ensemble, &default_grid(&series));
//! assert_eq!(ensemble.functions.len(), 4);
//! assert!(b.s.iter().all(|s| *s >= 0.0));
//! ```

pub mod ensemble;
pub mod error;
pub mod fit;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod search;

pub use ensemble::{
    asymmetry_report, band, build_ensemble, default_grid, default_grid_bounds, linear_grid,
    pointwise_stats, Comparators, Ensemble, PointStats, PredictionBand, DEFAULT_GRID_COUNT,
};
pub use error::{Result, SpaghettiError};
pub use fit::{
    fit_for_lambda, least_rough_interpolator, select_lambda_loo, solve_weights, FitConfig,
    LooProblem, SigmaSearch, SpaghettiFunction, TimeSeries,
};
pub use kernel::{roughness_entry, KernelBasis};
pub use linalg::{fit_least_squares_line, solve_spd, Cholesky, DenseMatrix, Line, SymMatrix};
