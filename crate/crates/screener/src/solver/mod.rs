//! Contract solvers.
//!
//! Three layers, each building on the one below:
//!
//! 1. **Payment minimization at a fixed accuracy.** [`min_payment_general`]
//!    prices the cheapest contract that makes a given accuracy the agent's
//!    best response, via a small linear program (see [`lp`]).
//!    [`min_payment_symmetric`] solves the same problem in closed form for
//!    mirror-symmetric environments.
//! 2. **Accuracy optimization.** [`optimize_accuracy`] searches over target
//!    accuracies for the best net payoff, comparing against the zero-contract
//!    benchmark of deciding on the prior alone.
//! 3. **Benchmarks.** [`linear::optimal_linear`] optimizes the simple
//!    return-share family, and [`gap_ratio`] reports how much of the optimum
//!    that simple family captures.

pub mod linear;
pub mod lp;
pub mod random;

use crate::agent;
use crate::contract::{Contract, CLASSIFY_TOL};
use crate::env::{CostError, CostSpec, Environment};
use linear::LinearShare;
use lp::{solve_lp, LinearProgram, LpError};
use thiserror::Error;

/// Cells below this are treated as unpaid when reading vertices off the LP.
const POSITIVE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("target accuracy must lie in (1/2, 1], got {0}")]
    TargetOutOfRange(f64),
    #[error(
        "accuracy {0} cannot be a best response: with a linear or free effort cost the agent \
         never stops at an interior accuracy"
    )]
    TargetNotImplementable(f64),
    #[error("this solver requires a mirror-symmetric environment")]
    NotSymmetric,
    #[error("payment program: {0}")]
    Lp(#[from] LpError),
    #[error("cost model: {0}")]
    Cost(#[from] CostError),
    #[error("solver cross-check failed: {0}")]
    CrossCheck(String),
}

/// A target accuracy together with the incentive numbers that implement it:
/// the payment slope the contract must create and the effort cost it must
/// compensate. Constructing one validates that the target is achievable as a
/// best response at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImplementationProblem {
    cost: CostSpec,
    target_accuracy: f64,
    required_slope: f64,
    effort_cost: f64,
}

impl ImplementationProblem {
    /// An interior target needs a unique stationary point of
    /// `payment - cost`, which requires strictly convex, genuinely costly
    /// effort; full accuracy is implementable for every cost in the family.
    pub fn new(cost: CostSpec, target_accuracy: f64) -> Result<Self, SolverError> {
        if !target_accuracy.is_finite() || target_accuracy <= 0.5 || target_accuracy > 1.0 {
            return Err(SolverError::TargetOutOfRange(target_accuracy));
        }
        if target_accuracy < 1.0 && (cost.coefficient() == 0.0 || cost.is_linear()) {
            return Err(SolverError::TargetNotImplementable(target_accuracy));
        }
        Ok(ImplementationProblem {
            cost,
            target_accuracy,
            required_slope: cost.marginal_cost(target_accuracy),
            effort_cost: cost.cost(target_accuracy),
        })
    }

    pub fn cost(&self) -> &CostSpec {
        &self.cost
    }

    pub fn target_accuracy(&self) -> f64 {
        self.target_accuracy
    }

    /// Slope the truthful payment line must have: marginal effort cost at the
    /// target, so the target is the agent's stationary point.
    pub fn required_slope(&self) -> f64 {
        self.required_slope
    }

    /// Effort cost at the target, entering the shirking constraints.
    pub fn effort_cost(&self) -> f64 {
        self.effort_cost
    }
}

/// Which payment-minimization routine an accuracy search should use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Implementor {
    /// The linear program over arbitrary contracts.
    General,
    /// The closed-form solver for mirror-symmetric environments.
    Symmetric,
}

/// Families a solved contract can fall into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractFamily {
    /// No recognized structure beyond the solver guarantees.
    General,
    /// Single confirmation bonus on extreme returns (see
    /// [`crate::contract::ThresholdForm`]).
    Threshold,
    /// Linear share of the realized return of the chosen option.
    Linear,
    /// The all-zero contract: no screening, decide on the prior.
    Zero,
}

impl std::fmt::Display for ContractFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ContractFamily::General => "general",
            ContractFamily::Threshold => "threshold",
            ContractFamily::Linear => "linear",
            ContractFamily::Zero => "zero",
        };
        write!(f, "{name}")
    }
}

/// Solution facts the caller usually wants alongside the contract itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// The always-low shirking constraint holds with equality.
    pub ic_low_binding: bool,
    /// The always-high shirking constraint holds with equality.
    pub ic_high_binding: bool,
    /// Simplex pivots spent (zero for closed-form routes).
    pub lp_iterations: usize,
    /// Cells paying more than the classification tolerance.
    pub positive_cells: usize,
}

/// A solved contract with its induced behaviour and payoff accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub contract: Contract,
    /// Accuracy the contract induces (the target, for fixed-accuracy solves).
    pub induced_accuracy: f64,
    /// Principal's gross expected return at that accuracy.
    pub gross_value: f64,
    /// Expected payment to a truthful agent at that accuracy.
    pub payment: f64,
    /// `gross_value - payment`.
    pub net_payoff: f64,
    pub family: ContractFamily,
    /// Bonus level for threshold contracts, share for linear ones.
    pub family_parameter: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// Options for [`optimize_accuracy`] and [`gap_ratio`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Size of the accuracy grid scanned before local refinement.
    pub accuracy_grid_points: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            accuracy_grid_points: 1001,
        }
    }
}

/// How well the best simple (linear-share) contract does against the best
/// contract overall.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    /// Optimal net payoff divided by the linear-share net payoff; at least 1
    /// by construction.
    pub ratio: f64,
    pub general: SolveResult,
    pub linear: LinearShare,
}

/// Builds the payment-minimization program for a target accuracy.
///
/// Variables are the `2n` payments `[r_low; r_high]`. Writing `p` for the
/// prior and `f_low`, `f_high` for the state pmfs, the truthful expected
/// payment at the target `g` is `alpha . r_low + beta . r_high` with
///
/// ```text
/// alpha_i = (1-p) g f_low_i + p (1-g) f_high_i      (low report cells)
/// beta_i  = (1-p) (1-g) f_low_i + p g f_high_i      (high report cells)
/// ```
///
/// Rows:
/// * effort: the payment slope in accuracy must equal the marginal cost at
///   the target, `sum_i a_i (r_low_i - r_high_i) = slope` with
///   `a_i = (1-p) f_low_i - p f_high_i`;
/// * no-research deviations: always-low earns `(alpha+beta) . r_low`, and
///   `R_low - pay(g) <= -cost(g)` reduces to
///   `beta . r_low - beta . r_high <= -cost(g)`; symmetrically always-high
///   gives `alpha . r_high - alpha . r_low <= -cost(g)`.
///
/// Flipped reporting needs no extra row: its payment line is the truthful
/// line reflected around accuracy 1/2, and with a non-negative slope pinned
/// by the effort row it stays weakly below on `[1/2, 1]`.
fn payment_program(env: &Environment, problem: &ImplementationProblem) -> LinearProgram {
    let n = env.len();
    let p = env.prior_high();
    let g = problem.target_accuracy();
    let f_low = env.pmf_low();
    let f_high = env.pmf_high();

    let mut objective = vec![0.0; 2 * n];
    let mut effort = vec![0.0; 2 * n];
    let mut ic_low = vec![0.0; 2 * n];
    let mut ic_high = vec![0.0; 2 * n];
    for i in 0..n {
        let alpha = (1.0 - p) * g * f_low[i] + p * (1.0 - g) * f_high[i];
        let beta = (1.0 - p) * (1.0 - g) * f_low[i] + p * g * f_high[i];
        let slope_coeff = (1.0 - p) * f_low[i] - p * f_high[i];
        objective[i] = alpha;
        objective[n + i] = beta;
        effort[i] = slope_coeff;
        effort[n + i] = -slope_coeff;
        ic_low[i] = beta;
        ic_low[n + i] = -beta;
        ic_high[i] = -alpha;
        ic_high[n + i] = alpha;
    }

    LinearProgram {
        objective,
        equalities: vec![(effort, problem.required_slope())],
        inequalities: vec![
            (ic_low, -problem.effort_cost()),
            (ic_high, -problem.effort_cost()),
        ],
    }
}

/// Cheapest contract making the target accuracy (with truthful reporting)
/// the agent's best response, over all non-negative payment matrices.
///
/// The optimum is computed twice by independent routes — simplex, and
/// exhaustive enumeration of the program's basic solutions — and the two
/// values must agree. Enumeration also pins down a *canonical* optimal
/// vertex (lexicographically smallest support, then smallest payment
/// vector), so the returned contract does not depend on pivot order.
pub fn min_payment_general(
    env: &Environment,
    problem: &ImplementationProblem,
) -> Result<SolveResult, SolverError> {
    let program = payment_program(env, problem);
    let simplex = solve_lp(&program)?;
    let (payments, vertex_value) = canonical_vertex(&program).ok_or_else(|| {
        SolverError::CrossCheck("vertex enumeration found no feasible basis".into())
    })?;
    if (vertex_value - simplex.value).abs() > 1e-8 * (1.0 + simplex.value.abs()) {
        return Err(SolverError::CrossCheck(format!(
            "simplex value {} disagrees with enumerated vertex value {}",
            simplex.value, vertex_value
        )));
    }

    let n = env.len();
    let contract = Contract::new(payments[..n].to_vec(), payments[n..].to_vec())
        .expect("enumerated vertices are clamped non-negative");
    Ok(assemble(env, problem, contract, simplex.iterations))
}

/// Optimal objective value of the payment program, without canonicalization —
/// the cheap evaluation used inside accuracy scans.
fn payment_value_general(
    env: &Environment,
    problem: &ImplementationProblem,
) -> Result<f64, SolverError> {
    Ok(solve_lp(&payment_program(env, problem))?.value)
}

/// Cheapest contract for a mirror-symmetric environment, in closed form.
///
/// Restricting to mirror-symmetric contracts `r_high = mirror(r_low)` is
/// costless: mirroring any feasible contract preserves its expected payment
/// and payment slope while exchanging the two shirking constraints, so
/// averaging a contract with its mirror stays feasible at equal cost. For a
/// symmetric contract both shirk payoffs equal the payment at accuracy 1/2,
/// making the no-research constraints automatic (convexity gives
/// `(g - 1/2) slope >= cost(g)`), and the program collapses to a knapsack
/// over the low-report payments `x`:
///
/// ```text
/// minimize  sum_i (g f_low_i + (1-g) f_high_i) x_i
/// s.t.      sum_i (f_low_i - f_high_i) x_i = slope,     x >= 0.
/// ```
///
/// All mass goes to the cells with the best slope-per-cost ratio. The bonus
/// is spread uniformly over that tie class, which under a monotone
/// likelihood ratio is a prefix of the support — a threshold contract: pay
/// when the realized return confirms the report.
pub fn min_payment_symmetric(
    env: &Environment,
    problem: &ImplementationProblem,
) -> Result<SolveResult, SolverError> {
    let (class, bonus, _) = symmetric_bonus(env, problem)?;
    let n = env.len();
    let mut pay_low = vec![0.0; n];
    let mut pay_high = vec![0.0; n];
    for &i in &class {
        pay_low[i] = bonus;
        pay_high[n - 1 - i] = bonus;
    }
    let contract = Contract::new(pay_low, pay_high).expect("bonus is non-negative");
    Ok(assemble(env, problem, contract, 0))
}

/// Shared core of the symmetric solver: the tie class of best-ratio cells,
/// the uniform bonus implementing the required slope, and the payment.
fn symmetric_bonus(
    env: &Environment,
    problem: &ImplementationProblem,
) -> Result<(Vec<usize>, f64, f64), SolverError> {
    if env.symmetry_center().is_none() {
        return Err(SolverError::NotSymmetric);
    }
    let f_low = env.pmf_low();
    let f_high = env.pmf_high();
    let g = problem.target_accuracy();
    let delta = |i: usize| f_low[i] - f_high[i];
    let weight = |i: usize| g * f_low[i] + (1.0 - g) * f_high[i];

    // Cells where the low-state pmf dominates create positive slope per unit
    // of payment. At least one exists: otherwise f_low <= f_high pointwise,
    // and two pmfs cannot dominate each other without being equal — which the
    // mean condition rules out.
    let eligible: Vec<usize> = (0..env.len()).filter(|&i| delta(i) > 0.0).collect();
    debug_assert!(!eligible.is_empty());

    // Ratio comparisons delta_i / weight_i are cross-multiplied to avoid
    // dividing by small weights.
    let mut best = eligible[0];
    for &i in &eligible[1..] {
        if delta(i) * weight(best) > delta(best) * weight(i) {
            best = i;
        }
    }
    let class: Vec<usize> = eligible
        .iter()
        .copied()
        .filter(|&i| {
            let lhs = delta(i) * weight(best);
            let rhs = delta(best) * weight(i);
            (lhs - rhs).abs() <= 1e-12 * lhs.max(rhs)
        })
        .collect();

    let total_slope: f64 = class.iter().map(|&i| delta(i)).sum();
    let bonus = problem.required_slope() / total_slope;
    let payment = bonus * class.iter().map(|&i| weight(i)).sum::<f64>();
    Ok((class, bonus, payment))
}

fn symmetric_payment_value(
    env: &Environment,
    problem: &ImplementationProblem,
) -> Result<f64, SolverError> {
    Ok(symmetric_bonus(env, problem)?.2)
}

/// Builds the returned record for a fixed-accuracy solve. Payment and
/// incentive slacks are recomputed from the final contract through the agent
/// model, not read back from solver internals.
fn assemble(
    env: &Environment,
    problem: &ImplementationProblem,
    contract: Contract,
    lp_iterations: usize,
) -> SolveResult {
    let gamma = problem.target_accuracy();
    let line = agent::truthful_payment_line(env, &contract);
    let shirk = agent::shirk_values(env, &contract);
    let payment = line.at(gamma);
    let utility = payment - problem.effort_cost();
    let slack_tol = 1e-9 * (1.0 + payment.abs() + shirk.max().abs());

    let class = contract.classify(env, CLASSIFY_TOL);
    let (family, family_parameter) = if contract.is_zero(CLASSIFY_TOL) {
        (ContractFamily::Zero, None)
    } else if let Some(form) = &class.threshold_form {
        (ContractFamily::Threshold, Some(form.bonus))
    } else {
        (ContractFamily::General, None)
    };

    let gross_value = env.principal_value(gamma);
    SolveResult {
        induced_accuracy: gamma,
        gross_value,
        payment,
        net_payoff: gross_value - payment,
        family,
        family_parameter,
        diagnostics: Diagnostics {
            ic_low_binding: utility - shirk.always_low <= slack_tol,
            ic_high_binding: utility - shirk.always_high <= slack_tol,
            lp_iterations,
            positive_cells: class.positive_cells,
        },
        contract,
    }
}

/// Searches target accuracies for the best net payoff and returns the full
/// solve at the winner, or the zero contract when no accuracy beats deciding
/// on the prior alone.
///
/// The net payoff `value(g) - min_payment(g)` is scanned on a uniform grid
/// over `(1/2, 1]`, the best bracket is refined by golden section, and the
/// final candidate set (refined point, bracket edges, grid best) is compared
/// exactly. Linear and free costs skip the scan: only full accuracy is
/// implementable.
pub fn optimize_accuracy(
    env: &Environment,
    cost: &CostSpec,
    implementor: Implementor,
    options: &SearchOptions,
) -> Result<SolveResult, SolverError> {
    if implementor == Implementor::Symmetric && env.symmetry_center().is_none() {
        return Err(SolverError::NotSymmetric);
    }

    let net_at = |gamma: f64| -> Result<f64, SolverError> {
        let problem = ImplementationProblem::new(*cost, gamma)?;
        let payment = match implementor {
            Implementor::General => payment_value_general(env, &problem)?,
            Implementor::Symmetric => symmetric_payment_value(env, &problem)?,
        };
        Ok(env.principal_value(gamma) - payment)
    };

    let (best_gamma, best_net) = if cost.coefficient() == 0.0 || cost.is_linear() {
        (1.0, net_at(1.0)?)
    } else {
        let points = options.accuracy_grid_points.max(3);
        let gamma_at = |j: usize| 0.5 + 0.5 * j as f64 / (points - 1) as f64;
        let mut best_j = points - 1;
        let mut best_w = f64::NEG_INFINITY;
        for j in 1..points {
            let w = net_at(gamma_at(j))?;
            if w > best_w {
                best_w = w;
                best_j = j;
            }
        }
        // Golden-section refinement inside the winning bracket. The left
        // edge stays strictly above 1/2, where targets stop being valid.
        let lo = gamma_at(best_j - 1).max(0.5 + 1e-9);
        let hi = gamma_at((best_j + 1).min(points - 1));
        let (refined, _) = golden_max(|g| net_at(g).unwrap_or(f64::NEG_INFINITY), lo, hi, 1e-7);
        let mut best = (gamma_at(best_j), best_w);
        for candidate in [refined, lo, hi] {
            // Probes this close to 1/2 ask the program for a nearly zero
            // slope, which can defeat the pivot tolerances. The grid winner
            // above is already a certified answer, so a probe that fails
            // numerically is skipped rather than treated as fatal.
            let Ok(w) = net_at(candidate) else { continue };
            if w > best.1 {
                best = (candidate, w);
            }
        }
        best
    };

    let benchmark = env.uninformed_value();
    if benchmark >= best_net {
        return Ok(zero_result(env));
    }
    let problem = ImplementationProblem::new(*cost, best_gamma)?;
    match implementor {
        Implementor::General => min_payment_general(env, &problem),
        Implementor::Symmetric => min_payment_symmetric(env, &problem),
    }
}

/// The no-screening outcome: pay nothing, decide on the prior.
fn zero_result(env: &Environment) -> SolveResult {
    let benchmark = env.uninformed_value();
    SolveResult {
        contract: Contract::zero(env.len()),
        induced_accuracy: 0.5,
        gross_value: benchmark,
        payment: 0.0,
        net_payoff: benchmark,
        family: ContractFamily::Zero,
        family_parameter: None,
        diagnostics: Diagnostics {
            ic_low_binding: false,
            ic_high_binding: false,
            lp_iterations: 0,
            positive_cells: 0,
        },
    }
}

/// Ratio of the best achievable net payoff to the best linear-share net
/// payoff.
///
/// The numerator takes the best of three lower-bound witnesses for the
/// overall optimum: the accuracy search itself, the linear benchmark (a
/// special case of general contracts), and a general implementation of the
/// accuracy the linear benchmark happens to induce. The ratio is therefore
/// at least 1 by construction, and the linear net is at least the uninformed
/// value, so the division is always sound.
pub fn gap_ratio(
    env: &Environment,
    cost: &CostSpec,
    options: &SearchOptions,
) -> Result<GapReport, SolverError> {
    let general = optimize_accuracy(env, cost, Implementor::General, options)?;
    let linear = linear::optimal_linear(env, cost)?;

    let mut numerator = general.net_payoff.max(linear.net_payoff);
    if linear.accuracy > 0.5 + 1e-9 {
        // Optional third witness; accuracies barely above 1/2 can make the
        // program ill-conditioned, and losing the witness only loosens the
        // numerator, so numerical failures here are not fatal.
        if let Ok(problem) = ImplementationProblem::new(*cost, linear.accuracy) {
            if let Ok(payment) = payment_value_general(env, &problem) {
                numerator = numerator.max(env.principal_value(linear.accuracy) - payment);
            }
        }
    }

    Ok(GapReport {
        ratio: numerator / linear.net_payoff,
        general,
        linear,
    })
}

/// Golden-section search for a maximum, returning the best point evaluated.
/// Assumes approximate unimodality on the bracket; callers double-check the
/// result against their own candidates.
fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        let (x, fx) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Enumerates every basic solution of the program in standard form and
/// returns the canonical optimal vertex: among bases within tolerance of the
/// best objective, the one with the lexicographically smallest positive
/// support, then the smallest payment vector. Returns `None` when no basis
/// is feasible.
fn canonical_vertex(program: &LinearProgram) -> Option<(Vec<f64>, f64)> {
    let n = program.objective.len();
    let n_ineq = program.inequalities.len();
    let m = program.equalities.len() + n_ineq;
    let cols = n + n_ineq;

    // Column j of the standard-form system at row i.
    let entry = |i: usize, j: usize| -> f64 {
        let (coeffs, _) = if i < program.equalities.len() {
            &program.equalities[i]
        } else {
            &program.inequalities[i - program.equalities.len()]
        };
        if j < n {
            coeffs[j]
        } else if j - n == i.wrapping_sub(program.equalities.len()) {
            1.0
        } else {
            0.0
        }
    };
    let rhs = |i: usize| -> f64 {
        if i < program.equalities.len() {
            program.equalities[i].1
        } else {
            program.inequalities[i - program.equalities.len()].1
        }
    };

    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    for combo in Combinations::new(cols, m) {
        let matrix: Vec<Vec<f64>> = (0..m)
            .map(|i| combo.iter().map(|&j| entry(i, j)).collect())
            .collect();
        let b: Vec<f64> = (0..m).map(rhs).collect();
        let Some(basic) = solve_square(matrix, b) else {
            continue;
        };
        if basic.iter().any(|&v| v < -POSITIVE_TOL) {
            continue;
        }
        let mut x = vec![0.0; n];
        let mut feasible_value = 0.0;
        for (&j, &v) in combo.iter().zip(&basic) {
            if j < n {
                x[j] = v.max(0.0);
                feasible_value += program.objective[j] * x[j];
            }
        }
        candidates.push((feasible_value, x));
    }

    let best_value = candidates
        .iter()
        .map(|(v, _)| *v)
        .fold(f64::INFINITY, f64::min);
    if !best_value.is_finite() {
        return None;
    }
    let band = 1e-9 * (1.0 + best_value.abs());
    candidates.retain(|(v, _)| *v <= best_value + band);
    candidates.sort_by(|(_, xa), (_, xb)| {
        let support = |x: &[f64]| -> Vec<usize> {
            x.iter()
                .enumerate()
                .filter(|&(_, &v)| v > POSITIVE_TOL)
                .map(|(i, _)| i)
                .collect()
        };
        support(xa).cmp(&support(xb)).then_with(|| {
            xa.iter()
                .zip(xb)
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let (value, x) = candidates.into_iter().next()?;
    Some((x, value))
}

/// Gaussian elimination with partial pivoting; `None` on (near-)singularity.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    for col in 0..m {
        let pivot_row = (col..m).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot_row][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..m {
            let (upper, lower) = a.split_at_mut(row);
            let source = &upper[col];
            let target = &mut lower[0];
            let factor = target[col] / source[col];
            if factor != 0.0 {
                for (t, &s) in target[col..m].iter_mut().zip(&source[col..m]) {
                    *t -= factor * s;
                }
                b[row] -= factor * b[col];
            }
        }
    }
    for col in (0..m).rev() {
        let mut sum = b[col];
        for j in col + 1..m {
            sum -= a[col][j] * b[j];
        }
        b[col] = sum / a[col][col];
    }
    Some(b)
}

/// Iterator over size-`m` index subsets of `0..cols` in lexicographic order.
struct Combinations {
    indices: Vec<usize>,
    cols: usize,
    done: bool,
}

impl Combinations {
    fn new(cols: usize, m: usize) -> Self {
        Combinations {
            indices: (0..m).collect(),
            done: m > cols,
            cols,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.indices.clone();
        let m = self.indices.len();
        let mut i = m;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.indices[i] < self.cols - (m - i) {
                self.indices[i] += 1;
                for j in i + 1..m {
                    self.indices[j] = self.indices[j - 1] + 1;
                }
                break;
            }
        }
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Report;
    use crate::testutil::{assert_close, cost_k15, env_crossing, env_humped};

    /// Four-point symmetric environment whose two leading cells share the
    /// best slope-per-cost ratio, so the optimal bonus spreads over a prefix.
    fn env_wide_prefix() -> Environment {
        Environment::new(
            0.5,
            vec![0.0, 0.5, 1.5, 2.0],
            vec![0.3, 0.3, 0.2, 0.2],
            vec![0.2, 0.2, 0.3, 0.3],
        )
        .unwrap()
    }

    #[test]
    fn problem_validation() {
        let quad = cost_k15();
        assert!(ImplementationProblem::new(quad, 0.5).is_err());
        assert!(ImplementationProblem::new(quad, 1.2).is_err());
        assert!(ImplementationProblem::new(quad, f64::NAN).is_err());
        let ok = ImplementationProblem::new(quad, 0.75).unwrap();
        assert_close(ok.required_slope(), 1.0 / 30.0, 1e-15);
        assert_close(ok.effort_cost(), 1.0 / 240.0, 1e-15);

        let linear = CostSpec::power(0.05, 1.0).unwrap();
        assert!(matches!(
            ImplementationProblem::new(linear, 0.75),
            Err(SolverError::TargetNotImplementable(_))
        ));
        assert_close(
            ImplementationProblem::new(linear, 1.0)
                .unwrap()
                .required_slope(),
            0.05,
            1e-15,
        );

        let free = CostSpec::quadratic(0.0).unwrap();
        assert!(ImplementationProblem::new(free, 0.9).is_err());
        assert_eq!(
            ImplementationProblem::new(free, 1.0)
                .unwrap()
                .required_slope(),
            0.0
        );
    }

    #[test]
    fn symmetric_solver_matches_hand_computed_values() {
        let env = env_crossing();

        let interior = ImplementationProblem::new(cost_k15(), 0.75).unwrap();
        let result = min_payment_symmetric(&env, &interior).unwrap();
        assert_close(result.payment, 1.0 / 24.0, 1e-12);
        assert_close(result.family_parameter.unwrap(), 1.0 / 12.0, 1e-12);
        assert_eq!(result.family, ContractFamily::Threshold);
        assert_eq!(result.diagnostics.positive_cells, 2);
        assert_close(result.gross_value, 1.1, 1e-12);
        assert_close(result.net_payoff, 1.1 - 1.0 / 24.0, 1e-12);
        // Quadratic cost leaves the shirking constraints slack.
        assert!(!result.diagnostics.ic_low_binding);
        assert!(!result.diagnostics.ic_high_binding);

        let full = ImplementationProblem::new(cost_k15(), 1.0).unwrap();
        let result = min_payment_symmetric(&env, &full).unwrap();
        assert_close(result.payment, 0.1, 1e-12);
        let form = result
            .contract
            .classify(&env, CLASSIFY_TOL)
            .threshold_form
            .unwrap();
        assert_close(form.bonus, 1.0 / 6.0, 1e-12);
        assert_eq!(form.low_threshold, Some(0.0));
        assert_eq!(form.high_threshold, Some(2.0));
    }

    #[test]
    fn symmetric_solver_handles_non_monotone_ratios() {
        let env = env_humped();
        assert!(!env.has_monotone_likelihood_ratio());
        let problem = ImplementationProblem::new(cost_k15(), 0.75).unwrap();
        let result = min_payment_symmetric(&env, &problem).unwrap();
        assert_close(result.payment, 1.0 / 24.0, 1e-12);
        // The bonus lands on the interior cells where the pmfs differ, not on
        // the extremes — so this is not a threshold contract.
        assert_eq!(result.family, ContractFamily::General);
        assert_close(result.contract.pay(Report::Low, 1), 2.0 / 15.0, 1e-12);
        assert_close(result.contract.pay(Report::High, 3), 2.0 / 15.0, 1e-12);
        assert_eq!(result.diagnostics.positive_cells, 2);
    }

    #[test]
    fn symmetric_solver_spreads_over_ratio_ties() {
        let env = env_wide_prefix();
        let problem = ImplementationProblem::new(cost_k15(), 0.75).unwrap();
        let result = min_payment_symmetric(&env, &problem).unwrap();
        assert_eq!(result.diagnostics.positive_cells, 4);
        assert_close(result.payment, 11.0 / 120.0, 1e-12);
        let form = result
            .contract
            .classify(&env, CLASSIFY_TOL)
            .threshold_form
            .unwrap();
        assert_eq!(form.low_threshold, Some(0.5));
        assert_eq!(form.high_threshold, Some(1.5));
        assert_close(form.bonus, 1.0 / 6.0, 1e-12);
    }

    #[test]
    fn symmetric_solver_rejects_lopsided_environments() {
        let env = Environment::new(
            0.6,
            vec![0.0, 1.0, 2.0],
            vec![0.6, 0.2, 0.2],
            vec![0.2, 0.2, 0.6],
        )
        .unwrap();
        let problem = ImplementationProblem::new(cost_k15(), 0.75).unwrap();
        assert_eq!(
            min_payment_symmetric(&env, &problem).unwrap_err(),
            SolverError::NotSymmetric
        );
    }

    #[test]
    fn general_solver_reaches_the_known_optimum() {
        let env = env_crossing();
        let problem = ImplementationProblem::new(cost_k15(), 1.0).unwrap();
        let result = min_payment_general(&env, &problem).unwrap();
        assert_close(result.payment, 0.1, 1e-10);
        // Canonical vertex: the optimal face is a segment of two-cell
        // contracts; its lexicographically smallest vertex pays 1/8 on the
        // confirmed-low cell and 5/24 on the confirmed-high cell.
        assert_close(result.contract.pay(Report::Low, 0), 1.0 / 8.0, 1e-9);
        assert_close(result.contract.pay(Report::High, 2), 5.0 / 24.0, 1e-9);
        assert_eq!(result.diagnostics.positive_cells, 2);
        // At this vertex the always-high deviation is exactly indifferent.
        assert!(result.diagnostics.ic_high_binding);
        assert!(!result.diagnostics.ic_low_binding);
    }

    #[test]
    fn general_matches_symmetric_on_symmetric_environments() {
        for env in [env_crossing(), env_humped(), env_wide_prefix()] {
            for gamma in [0.6, 0.75, 0.9, 1.0] {
                let problem = ImplementationProblem::new(cost_k15(), gamma).unwrap();
                let general = min_payment_general(&env, &problem).unwrap();
                let symmetric = min_payment_symmetric(&env, &problem).unwrap();
                assert_close(general.payment, symmetric.payment, 1e-8);
            }
        }
    }

    #[test]
    fn general_solver_prices_asymmetric_environments() {
        // Prior 0.3 on the high state; sanity-check against the agent model:
        // the contract must create exactly the required slope, and pay at
        // least cost plus the best shirk value.
        let env = Environment::new(
            0.3,
            vec![0.0, 1.0, 2.0],
            vec![0.5, 0.3, 0.2],
            vec![0.1, 0.3, 0.6],
        )
        .unwrap();
        let problem = ImplementationProblem::new(cost_k15(), 0.8).unwrap();
        let result = min_payment_general(&env, &problem).unwrap();
        let slope = agent::effort_slope(&env, &result.contract);
        assert_close(slope, problem.required_slope(), 1e-9);
        let response = agent::best_response(&env, problem.cost(), &result.contract);
        assert_eq!(response.strategy, agent::ReportStrategy::Truthful);
        assert_close(response.accuracy, 0.8, 1e-6);
        assert!(result.diagnostics.positive_cells <= 2);
    }

    #[test]
    fn free_effort_needs_no_payment() {
        let env = env_crossing();
        let problem = ImplementationProblem::new(CostSpec::quadratic(0.0).unwrap(), 1.0).unwrap();
        let result = min_payment_general(&env, &problem).unwrap();
        assert_close(result.payment, 0.0, 1e-12);
        assert_eq!(result.family, ContractFamily::Zero);
    }

    #[test]
    fn accuracy_search_on_the_crossing_benchmark() {
        let env = env_crossing();
        let options = SearchOptions::default();

        // k = 1/15: full accuracy, payment 1/10, net 1.1.
        let best = optimize_accuracy(&env, &cost_k15(), Implementor::Symmetric, &options).unwrap();
        assert_eq!(best.family, ContractFamily::Threshold);
        assert_close(best.induced_accuracy, 1.0, 1e-6);
        assert_close(best.net_payoff, 1.1, 1e-9);
        assert_close(best.family_parameter.unwrap(), 1.0 / 6.0, 1e-6);

        let general = optimize_accuracy(&env, &cost_k15(), Implementor::General, &options).unwrap();
        assert_close(general.net_payoff, 1.1, 1e-9);
        assert_close(general.payment, 0.1, 1e-9);

        // k = 0.15: interior optimum at accuracy 2/3.
        let cost = CostSpec::quadratic(0.15).unwrap();
        let mid = optimize_accuracy(&env, &cost, Implementor::Symmetric, &options).unwrap();
        assert_close(mid.induced_accuracy, 2.0 / 3.0, 1e-5);
        assert_close(mid.gross_value, 16.0 / 15.0, 1e-7);
        assert_close(mid.payment, 0.35 / 6.0, 1e-7);
        assert_close(mid.net_payoff, 121.0 / 120.0, 1e-9);

        // k = 0.25: screening is not worth paying for.
        let cost = CostSpec::quadratic(0.25).unwrap();
        let zero = optimize_accuracy(&env, &cost, Implementor::Symmetric, &options).unwrap();
        assert_eq!(zero.family, ContractFamily::Zero);
        assert_close(zero.net_payoff, 1.0, 1e-15);
        assert_close(zero.induced_accuracy, 0.5, 1e-15);
    }

    #[test]
    fn accuracy_search_with_free_or_linear_cost() {
        let env = env_crossing();
        let options = SearchOptions::default();

        let free = CostSpec::quadratic(0.0).unwrap();
        let result = optimize_accuracy(&env, &free, Implementor::General, &options).unwrap();
        assert_close(result.net_payoff, 1.2, 1e-12);
        assert_close(result.induced_accuracy, 1.0, 1e-15);
        assert_close(result.payment, 0.0, 1e-12);

        // Linear cost k = 0.05: only full accuracy is implementable. The
        // cheapest slope-0.05 contract is the bonus 0.05/0.4 = 0.125 on the
        // extreme cells, paying 0.6 * 0.125 = 0.075 at full accuracy, and the
        // shirking constraints bind exactly ((1/2) * slope = cost).
        let linear = CostSpec::power(0.05, 1.0).unwrap();
        let result = optimize_accuracy(&env, &linear, Implementor::General, &options).unwrap();
        assert_close(result.induced_accuracy, 1.0, 1e-15);
        assert_close(result.payment, 0.075, 1e-9);
        assert_close(result.net_payoff, 1.125, 1e-9);
        assert!(result.diagnostics.ic_low_binding || result.diagnostics.ic_high_binding);
    }

    #[test]
    fn humped_example_prefers_no_screening_at_high_cost() {
        // In the five-point environment the screening value rises too slowly:
        // above k = 1/16 even the cheapest contracts cost more than the
        // information is worth, so the search lands on the zero contract.
        let env = env_humped();
        let result = optimize_accuracy(
            &env,
            &cost_k15(),
            Implementor::General,
            &SearchOptions::default(),
        )
        .unwrap();
        assert_eq!(result.family, ContractFamily::Zero);
        assert_close(result.net_payoff, 1.0, 1e-15);

        // At k = 0.05 < 1/16 an interior accuracy pays for itself.
        let cost = CostSpec::quadratic(0.05).unwrap();
        let result =
            optimize_accuracy(&env, &cost, Implementor::General, &SearchOptions::default())
                .unwrap();
        assert_close(result.induced_accuracy, 0.625, 1e-5);
        assert_close(result.net_payoff, 1.0015625, 1e-9);
    }

    #[test]
    fn gap_ratio_on_the_crossing_benchmark() {
        let env = env_crossing();
        let options = SearchOptions::default();

        let report = gap_ratio(&env, &cost_k15(), &options).unwrap();
        assert_close(report.ratio, 132.0 / 121.0, 1e-7);
        assert!(report.ratio >= 1.0);

        // When both sides settle for the uninformed benchmark the ratio is
        // exactly one.
        let expensive = CostSpec::quadratic(0.25).unwrap();
        let report = gap_ratio(&env, &expensive, &options).unwrap();
        assert_eq!(report.ratio, 1.0);
    }

    #[test]
    fn combinations_enumerate_lexicographically() {
        let all: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn square_solver_handles_pivoting_and_singularity() {
        let x = solve_square(vec![vec![0.0, 2.0], vec![1.0, 1.0]], vec![4.0, 3.0]).unwrap();
        assert_close(x[0], 1.0, 1e-12);
        assert_close(x[1], 2.0, 1e-12);
        assert!(solve_square(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }
}
