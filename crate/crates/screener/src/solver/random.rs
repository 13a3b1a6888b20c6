//! Seeded random problem instances for stress tests and sweeps.
//!
//! Both generators use rejection sampling: draw a candidate environment from
//! a simple box distribution, keep it only if it validates and clears the
//! screening-value margins. The margins matter for test quality — an
//! environment whose conditional means sit within `MEAN_MARGIN` of the safe
//! return makes information nearly worthless and turns every downstream
//! tolerance check into a coin flip, so such draws are discarded.
//!
//! Generation is deterministic given the caller's RNG state; tests seed a
//! [`rand_chacha::ChaCha8Rng`] and rely on byte-for-byte reproducibility.

use std::ops::RangeInclusive;

use rand::Rng;

use crate::env::Environment;

/// Keep-side gap required between each conditional mean and the safe return.
const MEAN_MARGIN: f64 = 1e-3;

/// Minimum spacing between adjacent support points, so no draw can produce a
/// nearly-degenerate support that stresses tolerances instead of logic.
const MIN_SUPPORT_GAP: f64 = 1e-2;

/// Smallest pmf weight before normalization; keeps every support point
/// genuinely carried by both conditionals.
const MIN_WEIGHT: f64 = 0.05;

/// Rejection-sampling attempt budget before giving up.
const MAX_ATTEMPTS: usize = 10_000;

/// Draws a validated environment with support size in `sizes`.
///
/// The support always straddles the safe return (lowest point below 1,
/// highest above), the prior is bounded away from 0 and 1, and both pmfs put
/// at least [`MIN_WEIGHT`] of raw mass on every point. No symmetry or
/// likelihood-ratio structure is imposed.
///
/// # Panics
///
/// Panics if `sizes` is empty, asks for fewer than two points, or if no draw
/// is accepted within [`MAX_ATTEMPTS`] attempts (which indicates a bug — the
/// acceptance region is wide).
pub fn random_environment<R: Rng + ?Sized>(
    rng: &mut R,
    sizes: RangeInclusive<usize>,
) -> Environment {
    assert!(
        !sizes.is_empty() && *sizes.start() >= 2,
        "support size range must be non-empty and start at 2 or more",
    );
    for _ in 0..MAX_ATTEMPTS {
        let n = rng.gen_range(sizes.clone());
        let mut support = Vec::with_capacity(n);
        support.push(rng.gen_range(0.0..0.8));
        for _ in 0..n - 2 {
            support.push(rng.gen_range(0.05..2.45));
        }
        support.push(rng.gen_range(1.2..2.5));
        support.sort_by(f64::total_cmp);
        if support
            .windows(2)
            .any(|pair| pair[1] - pair[0] < MIN_SUPPORT_GAP)
        {
            continue;
        }
        let prior_high = rng.gen_range(0.05..0.95);
        let pmf_low = random_pmf(rng, n);
        let pmf_high = random_pmf(rng, n);
        if let Some(env) = accept(prior_high, support, pmf_low, pmf_high) {
            return env;
        }
    }
    panic!("no environment accepted after {MAX_ATTEMPTS} attempts");
}

/// Draws a validated environment that is symmetric about the safe return and
/// satisfies the monotone likelihood-ratio property.
///
/// The support is `1 ± offset` for random distinct offsets (plus the center
/// point when the size is odd), the prior is exactly 1/2, the low-state pmf
/// is sorted decreasing, and the high-state pmf is its reversal. Reversal
/// makes the likelihood ratio automatically monotone, and the decreasing low
/// pmf tilts the low conditional mean below the safe return.
///
/// # Panics
///
/// Same conditions as [`random_environment`].
pub fn random_symmetric_mlrp_environment<R: Rng + ?Sized>(
    rng: &mut R,
    sizes: RangeInclusive<usize>,
) -> Environment {
    assert!(
        !sizes.is_empty() && *sizes.start() >= 2,
        "support size range must be non-empty and start at 2 or more",
    );
    for _ in 0..MAX_ATTEMPTS {
        let n = rng.gen_range(sizes.clone());
        let pairs = n / 2;
        let mut offsets: Vec<f64> = (0..pairs).map(|_| rng.gen_range(0.05..1.0)).collect();
        offsets.sort_by(f64::total_cmp);
        if offsets
            .windows(2)
            .any(|pair| pair[1] - pair[0] < MIN_SUPPORT_GAP / 2.0)
        {
            continue;
        }
        let mut support: Vec<f64> = offsets.iter().rev().map(|d| 1.0 - d).collect();
        if n % 2 == 1 {
            support.push(1.0);
        }
        support.extend(offsets.iter().map(|d| 1.0 + d));
        let mut pmf_low = random_pmf(rng, n);
        pmf_low.sort_by(|a, b| b.total_cmp(a));
        let pmf_high: Vec<f64> = pmf_low.iter().rev().copied().collect();
        if let Some(env) = accept(0.5, support, pmf_low, pmf_high) {
            debug_assert!(env.has_monotone_likelihood_ratio());
            debug_assert_eq!(env.symmetry_center(), Some(1.0));
            return env;
        }
    }
    panic!("no symmetric environment accepted after {MAX_ATTEMPTS} attempts");
}

/// Normalized pmf with every raw weight at least [`MIN_WEIGHT`].
fn random_pmf<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let weights: Vec<f64> = (0..n).map(|_| rng.gen_range(MIN_WEIGHT..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / total).collect()
}

/// Builds the environment and applies the mean-margin filter.
fn accept(
    prior_high: f64,
    support: Vec<f64>,
    pmf_low: Vec<f64>,
    pmf_high: Vec<f64>,
) -> Option<Environment> {
    let env = Environment::new(prior_high, support, pmf_low, pmf_high).ok()?;
    if env.mean_low() <= 1.0 - MEAN_MARGIN && env.mean_high() >= 1.0 + MEAN_MARGIN {
        Some(env)
    } else {
        None
    }
}
