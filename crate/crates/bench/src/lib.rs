//! Fixtures shared by the benchmarks.

use spaghetti_core::TimeSeries;

/// `n` evenly spaced points of a gently trending, wavy series.
pub fn wavy_series(n: usize) -> TimeSeries {
    let points = (0..n)
        .map(|i| {
            let x = i as f64;
            (x, 0.3 * x + (0.9 * x).sin() + 0.2 * (2.3 * x).cos())
        })
        .collect();
    TimeSeries::new(points).expect("fixture is valid")
}
