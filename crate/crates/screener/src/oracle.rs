//! Brute-force grid oracle for cross-checking the analytic solvers.
//!
//! The oracle shares no code path with the linear-programming or closed-form
//! routes: it enumerates every contract with at most [`GridSpec::max_support`]
//! positive cells whose payments sit on a uniform level grid, plays out the
//! agent's best response restricted to a uniform accuracy grid, and keeps the
//! candidate with the highest principal net return. The two-cell default is
//! lossless for strictly convex effort costs — the payment-minimization
//! program has three rows, at least one inequality is always slack at an
//! optimum, so some optimal basic solution pays on at most two cells; raising
//! the cap to three probes that sparsity claim empirically instead of
//! assuming it.
//!
//! Everything is deterministic: the candidate ordering is fixed, ties are
//! broken by an explicit total order, and the parallel reduction over
//! candidates commutes. Grid answers carry `O(step)` error by construction;
//! [`GridSpec::accuracy_step`] and [`GridSpec::payment_step`] report the
//! resolution so callers can assert against resolution-aware bounds. Tests
//! pick grids whose steps place the known optima exactly on a node.

use rayon::prelude::*;
use thiserror::Error;

use crate::agent::{BestResponse, ReportStrategy};
use crate::contract::Contract;
use crate::env::{CostSpec, Environment};

/// Hard cap on enumerated contracts, guarding against accidental blow-ups
/// when a caller requests a dense grid on a wide support.
pub const MAX_CANDIDATES: usize = 10_000_000;

/// Relative tolerance for utility ties inside the grid best response,
/// matching the tie band used by the exact best response.
const TIE_EPS: f64 = 1e-11;

/// Largest supported positive-cell cap.
pub const MAX_SUPPORT_LIMIT: usize = 3;

/// Grid resolution for the oracle search.
///
/// Accuracies are `1/2 + (j / (accuracy_points - 1)) / 2` for
/// `j = 0..accuracy_points`, so the grid always contains both endpoints.
/// Payment levels are `i * max_payment / (payment_levels - 1)` for
/// `i = 0..payment_levels`, zero included; `payment_levels = 1` degenerates
/// to the level set `{0}`, leaving only the zero contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub accuracy_points: usize,
    pub payment_levels: usize,
    pub max_payment: f64,
    /// Maximum number of positive cells per enumerated contract (1 to 3).
    pub max_support: usize,
}

impl Default for GridSpec {
    /// Accuracy step `1e-3`; payment step `1/240`, which keeps the benchmark
    /// bonus levels used across the test suite exactly on the grid; two
    /// positive cells.
    fn default() -> Self {
        Self {
            accuracy_points: 501,
            payment_levels: 241,
            max_payment: 1.0,
            max_support: 2,
        }
    }
}

impl GridSpec {
    /// Spacing between adjacent accuracy grid points.
    pub fn accuracy_step(&self) -> f64 {
        0.5 / (self.accuracy_points.max(2) - 1) as f64
    }

    /// Spacing between adjacent payment levels (zero for the `{0}` grid).
    pub fn payment_step(&self) -> f64 {
        if self.payment_levels < 2 {
            0.0
        } else {
            self.max_payment / (self.payment_levels - 1) as f64
        }
    }

    fn validate(&self) -> Result<(), OracleError> {
        if self.accuracy_points < 2
            || self.payment_levels < 1
            || !self.max_payment.is_finite()
            || self.max_payment <= 0.0
            || self.max_support < 1
            || self.max_support > MAX_SUPPORT_LIMIT
        {
            return Err(OracleError::InvalidSpec);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(
        "grid spec needs at least two accuracy points, one payment level, a positive finite \
         max payment, and a support cap between 1 and {MAX_SUPPORT_LIMIT}"
    )]
    InvalidSpec,
    #[error("grid would enumerate {candidates} contracts, above the cap of {cap}")]
    GridTooLarge { candidates: usize, cap: usize },
}

/// Best contract found by exhaustive grid search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub contract: Contract,
    /// Accuracy the agent picks against the winning contract (on the grid).
    pub accuracy: f64,
    /// Reporting strategy the agent picks against the winning contract.
    pub strategy: ReportStrategy,
    /// Expected payment to the agent at that response.
    pub payment: f64,
    /// Screening value gross of payments at that response.
    pub gross_value: f64,
    /// `gross_value - payment`, the quantity the search maximizes.
    pub net_payoff: f64,
    /// Number of contracts enumerated.
    pub candidates: usize,
}

/// Precomputed per-grid-point quantities shared across all candidates.
struct Tables {
    gammas: Vec<f64>,
    costs: Vec<f64>,
    values: Vec<f64>,
}

impl Tables {
    fn build(env: &Environment, cost: &CostSpec, spec: &GridSpec) -> Self {
        let steps = (spec.accuracy_points - 1) as f64;
        let gammas: Vec<f64> = (0..spec.accuracy_points)
            .map(|j| 0.5 + 0.5 * j as f64 / steps)
            .collect();
        let costs = gammas.iter().map(|&g| cost.cost(g)).collect();
        let values = gammas.iter().map(|&g| env.principal_value(g)).collect();
        Self {
            gammas,
            costs,
            values,
        }
    }
}

/// Grid-restricted best response on pre-aggregated contract statistics.
///
/// Returns `(grid index, strategy, expected payment, utility)`. Ties follow
/// the exact best response: per orientation, exact ties go to higher
/// accuracy; across strategies, ties within a relative band go to higher
/// accuracy and then to the earlier strategy in priority order.
fn grid_response(
    at_half: f64,
    slope: f64,
    shirk_low: f64,
    shirk_high: f64,
    tables: &Tables,
) -> (usize, ReportStrategy, f64, f64) {
    // Best grid accuracy for one reporting orientation. A strictly negative
    // slope makes utility strictly decreasing, so the scan is skipped; at
    // zero slope the weak `>=` keeps the highest accuracy among exact ties,
    // matching the exact tie convention.
    let scan = |s: f64| -> (usize, f64, f64) {
        if s < 0.0 {
            return (0, at_half, at_half);
        }
        let mut best = (0, at_half, f64::NEG_INFINITY);
        for (j, (&g, &c)) in tables.gammas.iter().zip(&tables.costs).enumerate() {
            let pay = at_half + (g - 0.5) * s;
            let u = pay - c;
            if u >= best.2 {
                best = (j, pay, u);
            }
        }
        best
    };

    let truthful = scan(slope);
    let flipped = scan(-slope);
    let candidates = [
        (ReportStrategy::Truthful, truthful.0, truthful.1, truthful.2),
        (ReportStrategy::Flipped, flipped.0, flipped.1, flipped.2),
        (ReportStrategy::AlwaysLow, 0, shirk_low, shirk_low),
        (ReportStrategy::AlwaysHigh, 0, shirk_high, shirk_high),
    ];

    let best_utility = candidates
        .iter()
        .map(|c| c.3)
        .fold(f64::NEG_INFINITY, f64::max);
    let band = TIE_EPS * (1.0 + best_utility.abs());

    let mut chosen = None;
    for &(strategy, j, pay, u) in &candidates {
        if u < best_utility - band {
            continue;
        }
        // The array is already in priority order, so an equal-accuracy tie
        // keeps the earlier entry.
        let replace = match chosen {
            None => true,
            Some((_, cj, _, _)) => j > cj,
        };
        if replace {
            chosen = Some((strategy, j, pay, u));
        }
    }
    let (strategy, j, pay, u) = chosen.expect("candidate list is never empty");
    (j, strategy, pay, u)
}

/// Agent best response with accuracy restricted to the grid.
///
/// Same contract-facing semantics as the exact best response; used to play
/// out candidates on exactly the same footing as the oracle search.
pub fn grid_best_response(
    env: &Environment,
    cost: &CostSpec,
    contract: &Contract,
    spec: &GridSpec,
) -> Result<BestResponse, OracleError> {
    spec.validate()?;
    assert_eq!(
        env.len(),
        contract.len(),
        "contract does not fit environment"
    );
    let tables = Tables::build(env, cost, spec);
    let line = crate::agent::truthful_payment_line(env, contract);
    let shirk = crate::agent::shirk_values(env, contract);
    let (j, strategy, expected_payment, utility) = grid_response(
        line.at_half,
        line.slope,
        shirk.always_low,
        shirk.always_high,
        &tables,
    );
    Ok(BestResponse {
        accuracy: tables.gammas[j],
        strategy,
        expected_payment,
        utility,
    })
}

/// One enumerated candidate, scored. Cells use report-major ids: id `i < n`
/// is (low report, return `i`), id `n + i` is (high report, return `i`).
#[derive(Debug, Clone, Copy)]
struct Scored {
    net: f64,
    payment: f64,
    accuracy_index: usize,
    strategy: ReportStrategy,
    count: usize,
    cells: [usize; MAX_SUPPORT_LIMIT],
    values: [f64; MAX_SUPPORT_LIMIT],
}

/// Strict total order: higher net, then fewer cells, then lexicographically
/// earlier support, lower payments, higher accuracy, preferred strategy.
/// Total on distinct candidates, which makes the parallel reduction
/// deterministic regardless of how work is split across threads.
fn better(a: &Scored, b: &Scored) -> bool {
    let values = |x: &Scored, y: &Scored| {
        y.values[0]
            .total_cmp(&x.values[0])
            .then_with(|| y.values[1].total_cmp(&x.values[1]))
            .then_with(|| y.values[2].total_cmp(&x.values[2]))
    };
    a.net
        .total_cmp(&b.net)
        .then_with(|| b.count.cmp(&a.count))
        .then_with(|| b.cells.cmp(&a.cells))
        .then_with(|| values(a, b))
        .then_with(|| a.accuracy_index.cmp(&b.accuracy_index))
        .then_with(|| b.strategy.priority().cmp(&a.strategy.priority()))
        .is_gt()
}

const UNUSED: (usize, f64) = (usize::MAX, 0.0);

/// Exhaustive search over grid contracts with at most
/// [`GridSpec::max_support`] positive cells.
///
/// The returned net payoff is exact for the returned contract up to the
/// accuracy grid: payments and screening values are evaluated with the same
/// formulas as the analytic route, only the agent's accuracy is snapped to
/// the grid. Used as an independent witness in tests.
pub fn grid_optimal_contract(
    env: &Environment,
    cost: &CostSpec,
    spec: &GridSpec,
) -> Result<OracleResult, OracleError> {
    spec.validate()?;
    let n = env.len();
    let cell_count = 2 * n;
    let levels_per_cell = spec.payment_levels - 1;
    let supports_of = |size: usize| -> usize {
        // C(cell_count, size) for size in 1..=3.
        match size {
            1 => cell_count,
            2 => cell_count * (cell_count - 1) / 2,
            _ => cell_count * (cell_count - 1) * (cell_count - 2) / 6,
        }
    };
    let mut candidates = 1usize;
    for size in 1..=spec.max_support {
        let mut per_support = 1usize;
        for _ in 0..size {
            per_support = per_support.saturating_mul(levels_per_cell);
        }
        candidates = candidates.saturating_add(supports_of(size).saturating_mul(per_support));
    }
    if candidates > MAX_CANDIDATES {
        return Err(OracleError::GridTooLarge {
            candidates,
            cap: MAX_CANDIDATES,
        });
    }

    let tables = Tables::build(env, cost, spec);
    let last = (spec.payment_levels.max(2) - 1) as f64;
    let levels: Vec<f64> = (1..spec.payment_levels)
        .map(|i| i as f64 * spec.max_payment / last)
        .collect();
    let p = env.prior_high();
    let f_low = env.pmf_low();
    let f_high = env.pmf_high();

    let score = |cells: [(usize, f64); MAX_SUPPORT_LIMIT], count: usize| -> Scored {
        let (mut ll, mut lh, mut hl, mut hh) = (0.0, 0.0, 0.0, 0.0);
        for &(cell, x) in &cells[..count] {
            if cell < n {
                ll += f_low[cell] * x;
                hl += f_high[cell] * x;
            } else {
                lh += f_low[cell - n] * x;
                hh += f_high[cell - n] * x;
            }
        }
        let slope = (1.0 - p) * (ll - lh) + p * (hh - hl);
        let at_half = 0.5 * ((1.0 - p) * (ll + lh) + p * (hh + hl));
        let shirk_low = (1.0 - p) * ll + p * hl;
        let shirk_high = (1.0 - p) * lh + p * hh;
        let (j, strategy, payment, _) =
            grid_response(at_half, slope, shirk_low, shirk_high, &tables);
        Scored {
            net: tables.values[j] - payment,
            payment,
            accuracy_index: j,
            strategy,
            count,
            cells: [cells[0].0, cells[1].0, cells[2].0],
            values: [cells[0].1, cells[1].1, cells[2].1],
        }
    };

    let zero = score([UNUSED; MAX_SUPPORT_LIMIT], 0);

    // One parallel task per support set; the level loops run inside the task.
    let mut supports: Vec<[usize; MAX_SUPPORT_LIMIT]> = Vec::new();
    for a in 0..cell_count {
        supports.push([a, usize::MAX, usize::MAX]);
        if spec.max_support < 2 {
            continue;
        }
        for b in a + 1..cell_count {
            supports.push([a, b, usize::MAX]);
            if spec.max_support < 3 {
                continue;
            }
            for c in b + 1..cell_count {
                supports.push([a, b, c]);
            }
        }
    }

    let best = supports
        .par_iter()
        .map(|&cells| {
            let mut best = zero;
            let mut consider = |scored: Scored| {
                if better(&scored, &best) {
                    best = scored;
                }
            };
            if cells[1] == usize::MAX {
                for &x in &levels {
                    consider(score([(cells[0], x), UNUSED, UNUSED], 1));
                }
            } else if cells[2] == usize::MAX {
                for &xa in &levels {
                    for &xb in &levels {
                        consider(score([(cells[0], xa), (cells[1], xb), UNUSED], 2));
                    }
                }
            } else {
                for &xa in &levels {
                    for &xb in &levels {
                        for &xc in &levels {
                            consider(score([(cells[0], xa), (cells[1], xb), (cells[2], xc)], 3));
                        }
                    }
                }
            }
            best
        })
        .reduce(|| zero, |x, y| if better(&y, &x) { y } else { x });

    let mut pay_low = vec![0.0; n];
    let mut pay_high = vec![0.0; n];
    for slot in 0..best.count {
        let (cell, x) = (best.cells[slot], best.values[slot]);
        if cell < n {
            pay_low[cell] = x;
        } else {
            pay_high[cell - n] = x;
        }
    }
    let contract =
        Contract::new(pay_low, pay_high).expect("grid payments are finite and non-negative");

    Ok(OracleResult {
        contract,
        accuracy: tables.gammas[best.accuracy_index],
        strategy: best.strategy,
        payment: best.payment,
        gross_value: tables.values[best.accuracy_index],
        net_payoff: best.net,
        candidates,
    })
}
