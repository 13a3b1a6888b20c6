//! A small dense linear-programming solver.
//!
//! Solves `min c . x` subject to `A_eq x = b_eq`, `A_le x <= b_le`, `x >= 0`
//! with a textbook two-phase primal simplex on a dense tableau. The payment
//! programs this crate builds are tiny — a handful of rows over `2n` payment
//! variables — so the priorities are exactness of the vertex structure and
//! predictable behaviour, not sparse-matrix performance:
//!
//! * Bland's rule (lowest eligible index for both the entering column and,
//!   among tied ratios, the leaving variable) — no cycling, deterministic
//!   pivot sequence, reproducible bases.
//! * Phase 1 puts an artificial on every row; leftover basic artificials are
//!   driven out with degenerate pivots and genuinely redundant rows are
//!   dropped, so phase 2 starts from a clean basis.
//! * The returned point is checked against the original constraints and the
//!   solve fails loudly rather than returning a silently infeasible answer.

use thiserror::Error;

/// Pivot tolerance: entries and reduced costs smaller than this count as zero.
const PIVOT_TOL: f64 = 1e-9;

/// Simplex pivot budget. The contract programs need a dozen pivots at most;
/// hitting this cap indicates a malformed program rather than a hard one.
const MAX_ITERATIONS: usize = 10_000;

/// `min objective . x` over `x >= 0` subject to the listed rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    /// Cost coefficients, one per structural variable.
    pub objective: Vec<f64>,
    /// Rows `(a, b)` enforcing `a . x = b`.
    pub equalities: Vec<(Vec<f64>, f64)>,
    /// Rows `(a, b)` enforcing `a . x <= b`.
    pub inequalities: Vec<(Vec<f64>, f64)>,
}

/// An optimal basic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Optimal structural variables.
    pub x: Vec<f64>,
    /// Slack of each inequality row, in input order (`b - a . x`).
    pub slacks: Vec<f64>,
    /// Optimal objective value, recomputed as `objective . x`.
    pub value: f64,
    /// Total simplex pivots across both phases.
    pub iterations: usize,
    /// Indices of the basic variables (structural first, then slacks).
    pub basis: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("constraint rows must match the objective length {expected}, row {row} has {found}")]
    DimensionMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("program data contains a non-finite coefficient")]
    NonFiniteData,
    #[error("the program is infeasible (phase-1 residual {residual})")]
    Infeasible { residual: f64 },
    #[error("the program is unbounded below")]
    Unbounded,
    #[error("simplex did not converge within {MAX_ITERATIONS} pivots")]
    IterationLimit,
    #[error("solution failed the feasibility recheck: {0}")]
    Numerical(String),
}

struct Tableau {
    /// `rows x (cols + 1)` matrix; the last column is the right-hand side.
    a: Vec<Vec<f64>>,
    /// Basic variable of each row.
    basis: Vec<usize>,
    cols: usize,
    iterations: usize,
}

impl Tableau {
    fn rhs(&self, row: usize) -> f64 {
        self.a[row][self.cols]
    }

    /// Reduced-cost row for the given cost vector, assuming the tableau is in
    /// canonical form with respect to the current basis. The final entry is
    /// the negated objective value.
    fn reduced_row(&self, cost: &[f64]) -> Vec<f64> {
        let mut row = cost.to_vec();
        row.push(0.0);
        for (i, &bv) in self.basis.iter().enumerate() {
            let weight = cost[bv];
            if weight != 0.0 {
                for (r, &v) in row.iter_mut().zip(&self.a[i]) {
                    *r -= weight * v;
                }
            }
        }
        row
    }

    fn pivot(&mut self, row: usize, col: usize, reduced: &mut [f64]) {
        let scale = self.a[row][col];
        for v in self.a[row].iter_mut() {
            *v /= scale;
        }
        for i in 0..self.a.len() {
            if i == row {
                continue;
            }
            let factor = self.a[i][col];
            if factor != 0.0 {
                for j in 0..=self.cols {
                    self.a[i][j] -= factor * self.a[row][j];
                }
            }
        }
        let factor = reduced[col];
        if factor != 0.0 {
            for (r, &v) in reduced.iter_mut().zip(&self.a[row]) {
                *r -= factor * v;
            }
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Runs the simplex loop until the reduced costs over `eligible_cols` are
    /// non-negative. Bland's rule on both choices.
    fn optimize(&mut self, reduced: &mut [f64], eligible_cols: usize) -> Result<(), LpError> {
        loop {
            if self.iterations > MAX_ITERATIONS {
                return Err(LpError::IterationLimit);
            }
            let Some(entering) = (0..eligible_cols).find(|&j| reduced[j] < -PIVOT_TOL) else {
                return Ok(());
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.a.len() {
                let coeff = self.a[i][entering];
                if coeff > PIVOT_TOL {
                    let ratio = self.rhs(i) / coeff;
                    let better = match leaving {
                        None => true,
                        Some((best_row, best_ratio)) => {
                            ratio < best_ratio
                                || (ratio == best_ratio && self.basis[i] < self.basis[best_row])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                return Err(LpError::Unbounded);
            };
            self.pivot(row, entering, reduced);
        }
    }
}

/// Solves the program; see the module docs for the method.
pub fn solve_lp(program: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = program.objective.len();
    let rows: Vec<(&Vec<f64>, f64, bool)> = program
        .equalities
        .iter()
        .map(|(a, b)| (a, *b, false))
        .chain(program.inequalities.iter().map(|(a, b)| (a, *b, true)))
        .collect();

    for (i, (a, b, _)) in rows.iter().enumerate() {
        if a.len() != n {
            return Err(LpError::DimensionMismatch {
                row: i,
                expected: n,
                found: a.len(),
            });
        }
        if !b.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(LpError::NonFiniteData);
        }
    }
    if program.objective.iter().any(|v| !v.is_finite()) {
        return Err(LpError::NonFiniteData);
    }

    let m = rows.len();
    let n_slack = program.inequalities.len();
    let art_start = n + n_slack;
    let cols = art_start + m;

    // Assemble [A | S | I][x; s; a] = b with b >= 0 (rows flipped as needed)
    // and one artificial per row.
    let mut a = vec![vec![0.0; cols + 1]; m];
    let mut slack_no = 0;
    for (i, (coeffs, b, is_ineq)) in rows.iter().enumerate() {
        let flip = if *b < 0.0 { -1.0 } else { 1.0 };
        for (j, &v) in coeffs.iter().enumerate() {
            a[i][j] = flip * v;
        }
        if *is_ineq {
            a[i][n + slack_no] = flip;
            slack_no += 1;
        }
        a[i][art_start + i] = 1.0;
        a[i][cols] = flip * b;
    }

    let mut tableau = Tableau {
        a,
        basis: (art_start..cols).collect(),
        cols,
        iterations: 0,
    };

    // Phase 1: minimize the sum of artificials.
    let mut phase1_cost = vec![0.0; cols];
    for c in phase1_cost.iter_mut().skip(art_start) {
        *c = 1.0;
    }
    let mut reduced = tableau.reduced_row(&phase1_cost);
    tableau.optimize(&mut reduced, cols)?;

    let residual: f64 = tableau
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bv)| bv >= art_start)
        .map(|(i, _)| tableau.rhs(i))
        .sum();
    let scale = rows.iter().map(|(_, b, _)| b.abs()).fold(1.0, f64::max);
    if residual > 1e-8 * scale {
        return Err(LpError::Infeasible { residual });
    }

    // Drive zero-level artificials out of the basis; a row with no usable
    // structural pivot is redundant and gets dropped.
    let mut row = 0;
    while row < tableau.a.len() {
        if tableau.basis[row] >= art_start {
            match (0..art_start).find(|&j| tableau.a[row][j].abs() > PIVOT_TOL) {
                Some(col) => {
                    let mut dummy = vec![0.0; cols + 1];
                    tableau.pivot(row, col, &mut dummy);
                    row += 1;
                }
                None => {
                    tableau.a.remove(row);
                    tableau.basis.remove(row);
                }
            }
        } else {
            row += 1;
        }
    }

    // Phase 2 on the real objective; artificial columns are no longer
    // eligible to enter, and none of them is basic.
    let mut phase2_cost = vec![0.0; cols];
    phase2_cost[..n].copy_from_slice(&program.objective);
    let mut reduced = tableau.reduced_row(&phase2_cost);
    tableau.optimize(&mut reduced, art_start)?;

    let mut full = vec![0.0; cols];
    for (i, &bv) in tableau.basis.iter().enumerate() {
        full[bv] = tableau.rhs(i);
    }
    let x: Vec<f64> = full[..n].to_vec();
    let value = x
        .iter()
        .zip(&program.objective)
        .map(|(xi, ci)| xi * ci)
        .sum();

    let solution = LpSolution {
        slacks: full[n..art_start].to_vec(),
        basis: {
            let mut basis = tableau.basis.clone();
            basis.sort_unstable();
            basis
        },
        x,
        value,
        iterations: tableau.iterations,
    };
    check_solution(program, &solution)?;
    Ok(solution)
}

/// Re-validates the candidate point against the *original* data, guarding
/// against accumulated pivot error.
fn check_solution(program: &LinearProgram, solution: &LpSolution) -> Result<(), LpError> {
    for (j, &v) in solution.x.iter().enumerate() {
        if !v.is_finite() || v < -1e-9 {
            return Err(LpError::Numerical(format!(
                "variable {j} is negative or non-finite: {v}"
            )));
        }
    }
    let activity = |coeffs: &[f64]| -> (f64, f64) {
        let mut sum = 0.0;
        let mut magnitude = 0.0;
        for (a, x) in coeffs.iter().zip(&solution.x) {
            sum += a * x;
            magnitude += (a * x).abs();
        }
        (sum, magnitude)
    };
    for (i, (coeffs, b)) in program.equalities.iter().enumerate() {
        let (sum, magnitude) = activity(coeffs);
        let tol = 1e-9 * (1.0 + b.abs() + magnitude);
        if (sum - b).abs() > tol {
            return Err(LpError::Numerical(format!(
                "equality row {i} has residual {}",
                sum - b
            )));
        }
    }
    for (i, (coeffs, b)) in program.inequalities.iter().enumerate() {
        let (sum, magnitude) = activity(coeffs);
        let tol = 1e-9 * (1.0 + b.abs() + magnitude);
        if sum - b > tol {
            return Err(LpError::Numerical(format!(
                "inequality row {i} is violated by {}",
                sum - b
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::assert_close;

    #[test]
    fn picks_the_cheaper_vertex() {
        let program = LinearProgram {
            objective: vec![1.0, 1.0],
            equalities: vec![(vec![1.0, 2.0], 1.0)],
            inequalities: vec![],
        };
        let solution = solve_lp(&program).unwrap();
        assert_close(solution.value, 0.5, 1e-12);
        assert_close(solution.x[0], 0.0, 1e-12);
        assert_close(solution.x[1], 0.5, 1e-12);
    }

    #[test]
    fn binding_inequality_reports_zero_slack() {
        // Unique optimum at (2, 0): the first row is loose there, the second
        // binds, and the reported slacks must say so.
        let program = LinearProgram {
            objective: vec![-1.0, 1.0],
            equalities: vec![],
            inequalities: vec![(vec![1.0, 1.0], 3.0), (vec![1.0, 0.0], 2.0)],
        };
        let solution = solve_lp(&program).unwrap();
        assert_close(solution.value, -2.0, 1e-12);
        assert_close(solution.x[0], 2.0, 1e-12);
        assert_close(solution.x[1], 0.0, 1e-12);
        assert_close(solution.slacks[0], 1.0, 1e-12);
        assert_close(solution.slacks[1], 0.0, 1e-12);
    }

    #[test]
    fn negative_rhs_rows_are_flipped_not_rejected() {
        // -x <= -2 is x >= 2.
        let program = LinearProgram {
            objective: vec![1.0],
            equalities: vec![],
            inequalities: vec![(vec![-1.0], -2.0)],
        };
        let solution = solve_lp(&program).unwrap();
        assert_close(solution.value, 2.0, 1e-12);
    }

    #[test]
    fn detects_infeasibility() {
        let contradictory = LinearProgram {
            objective: vec![1.0, 1.0],
            equalities: vec![(vec![1.0, 1.0], 1.0), (vec![1.0, 1.0], 2.0)],
            inequalities: vec![],
        };
        assert!(matches!(
            solve_lp(&contradictory),
            Err(LpError::Infeasible { .. })
        ));

        let sign_blocked = LinearProgram {
            objective: vec![1.0],
            equalities: vec![(vec![1.0], -1.0)],
            inequalities: vec![],
        };
        assert!(matches!(
            solve_lp(&sign_blocked),
            Err(LpError::Infeasible { .. })
        ));
    }

    #[test]
    fn detects_unboundedness() {
        let free_fall = LinearProgram {
            objective: vec![-1.0, 0.0],
            equalities: vec![],
            inequalities: vec![(vec![0.0, 1.0], 1.0)],
        };
        assert_eq!(solve_lp(&free_fall), Err(LpError::Unbounded));

        let no_rows = LinearProgram {
            objective: vec![-1.0],
            equalities: vec![],
            inequalities: vec![],
        };
        assert_eq!(solve_lp(&no_rows), Err(LpError::Unbounded));
    }

    #[test]
    fn empty_program_is_trivially_optimal() {
        let program = LinearProgram {
            objective: vec![1.0, 2.0],
            equalities: vec![],
            inequalities: vec![],
        };
        let solution = solve_lp(&program).unwrap();
        assert_close(solution.value, 0.0, 1e-15);
        assert!(solution.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn drops_redundant_rows() {
        let program = LinearProgram {
            objective: vec![1.0, 0.0],
            equalities: vec![(vec![1.0, 1.0], 1.0), (vec![2.0, 2.0], 2.0)],
            inequalities: vec![],
        };
        let solution = solve_lp(&program).unwrap();
        assert_close(solution.value, 0.0, 1e-12);
        assert_close(solution.x[1], 1.0, 1e-12);
    }

    #[test]
    fn rejects_ragged_rows() {
        let program = LinearProgram {
            objective: vec![1.0, 1.0],
            equalities: vec![(vec![1.0], 1.0)],
            inequalities: vec![],
        };
        assert!(matches!(
            solve_lp(&program),
            Err(LpError::DimensionMismatch { row: 0, .. })
        ));
    }

    #[test]
    fn rejects_non_finite_data() {
        let program = LinearProgram {
            objective: vec![f64::NAN],
            equalities: vec![],
            inequalities: vec![],
        };
        assert_eq!(solve_lp(&program), Err(LpError::NonFiniteData));
    }

    /// The payment-minimization program of the three-point benchmark at
    /// full accuracy: six payment variables, one slope equality, two shirking
    /// constraints. Optimal value 1/10.
    #[test]
    fn solves_the_benchmark_payment_program() {
        let c = 1.0 / 60.0;
        let program = LinearProgram {
            objective: vec![0.3, 0.1, 0.1, 0.1, 0.1, 0.3],
            equalities: vec![(vec![0.2, 0.0, -0.2, -0.2, 0.0, 0.2], 1.0 / 15.0)],
            inequalities: vec![
                (vec![0.1, 0.1, 0.3, -0.1, -0.1, -0.3], -c),
                (vec![-0.3, -0.1, -0.1, 0.3, 0.1, 0.1], -c),
            ],
        };
        let solution = solve_lp(&program).unwrap();
        assert_close(solution.value, 0.1, 1e-10);
        // A vertex uses at most three positive variables (three rows).
        let positives = solution
            .x
            .iter()
            .chain(&solution.slacks)
            .filter(|&&v| v > 1e-9)
            .count();
        assert!(positives <= 3, "vertex has {positives} positive entries");
    }
}
