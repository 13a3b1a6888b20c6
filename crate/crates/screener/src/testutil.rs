//! Shared fixtures for the unit tests: the two benchmark environments that
//! thread through the whole suite, plus a debug-friendly closeness assertion.

use crate::env::{CostSpec, Environment};

/// Three-point symmetric environment with a monotone likelihood ratio:
/// returns (0, 1, 2), balanced prior, state means 0.6 and 1.4.
pub(crate) fn env_crossing() -> Environment {
    Environment::new(
        0.5,
        vec![0.0, 1.0, 2.0],
        vec![0.6, 0.2, 0.2],
        vec![0.2, 0.2, 0.6],
    )
    .unwrap()
}

/// Five-point symmetric environment whose likelihood ratio is *not*
/// monotone (it dips at the second return level): returns (0, 1/2, 1, 3/2, 2),
/// state means 7/8 and 9/8.
pub(crate) fn env_humped() -> Environment {
    Environment::new(
        0.5,
        vec![0.0, 0.5, 1.0, 1.5, 2.0],
        vec![0.125, 0.375, 0.25, 0.125, 0.125],
        vec![0.125, 0.125, 0.25, 0.375, 0.125],
    )
    .unwrap()
}

/// Quadratic cost with the coefficient most hand-computed expectations use,
/// k = 1/15.
pub(crate) fn cost_k15() -> CostSpec {
    CostSpec::quadratic(1.0 / 15.0).unwrap()
}

#[track_caller]
pub(crate) fn assert_close(actual: f64, expected: f64, tol: f64) {
    assert!(
        (actual - expected).abs() <= tol,
        "expected {expected}, got {actual} (difference {}, tolerance {tol})",
        (actual - expected).abs()
    );
}
