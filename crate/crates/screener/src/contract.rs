//! Compensation contracts.
//!
//! A contract specifies a non-negative payment for every (report, realized
//! return) cell. Payments may condition on the realized return only when the
//! principal actually invests; cells under a non-investing report are still
//! carried in the matrix because the *shape* of the contract — which cells
//! pay, and how much — is what the solvers optimize over. Classification
//! helpers recognize the structured shapes that matter downstream: mirror
//! symmetry, the "at most two positive payment levels" property, and
//! threshold (confirmation bonus) form.

use crate::agent::{self, ReportStrategy};
use crate::env::{Environment, Report};
use thiserror::Error;

/// Default tolerance below which a payment cell counts as zero and two
/// payment levels count as equal.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Why a [`Contract`] (or an operation on one) was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContractError {
    #[error("payment vectors must have equal, positive length: low {low}, high {high}")]
    LengthMismatch { low: usize, high: usize },
    #[error("payment for report {report} at index {index} is negative or non-finite: {value}")]
    InvalidPayment {
        report: Report,
        index: usize,
        value: f64,
    },
    #[error("scale factor must be finite and non-negative, got {0}")]
    InvalidScale(f64),
    #[error("lift probability must lie in (0, 1], got {0}")]
    InvalidEpsilon(f64),
}

/// A payment matrix over (report, realized return) cells.
///
/// Rows are indexed by the report (`Low`/`High`), columns by the position of
/// the realized return in the environment's support. All entries are finite
/// and non-negative; limited liability is baked in at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    pay_low_report: Vec<f64>,
    pay_high_report: Vec<f64>,
}

impl Contract {
    pub fn new(pay_low_report: Vec<f64>, pay_high_report: Vec<f64>) -> Result<Self, ContractError> {
        if pay_low_report.len() != pay_high_report.len() || pay_low_report.is_empty() {
            return Err(ContractError::LengthMismatch {
                low: pay_low_report.len(),
                high: pay_high_report.len(),
            });
        }
        for (report, payments) in [
            (Report::Low, &pay_low_report),
            (Report::High, &pay_high_report),
        ] {
            for (index, &value) in payments.iter().enumerate() {
                if !value.is_finite() || value < 0.0 {
                    return Err(ContractError::InvalidPayment {
                        report,
                        index,
                        value,
                    });
                }
            }
        }
        Ok(Contract {
            pay_low_report,
            pay_high_report,
        })
    }

    /// The all-zero contract over a support of the given size.
    pub fn zero(len: usize) -> Self {
        Contract {
            pay_low_report: vec![0.0; len],
            pay_high_report: vec![0.0; len],
        }
    }

    /// Number of return levels the contract is defined over.
    pub fn len(&self) -> usize {
        self.pay_low_report.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pay_low_report.is_empty()
    }

    /// Payment vector conditional on the given report.
    pub fn payments(&self, report: Report) -> &[f64] {
        match report {
            Report::Low => &self.pay_low_report,
            Report::High => &self.pay_high_report,
        }
    }

    /// Payment in a single (report, return index) cell.
    pub fn pay(&self, report: Report, index: usize) -> f64 {
        self.payments(report)[index]
    }

    /// Largest payment across all cells.
    pub fn max_payment(&self) -> f64 {
        self.pay_low_report
            .iter()
            .chain(&self.pay_high_report)
            .fold(0.0_f64, |acc, &v| acc.max(v))
    }

    /// True when every cell is at most `tol`.
    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_payment() <= tol
    }

    /// Multiplies every payment by `factor >= 0`.
    pub fn scale(&self, factor: f64) -> Result<Self, ContractError> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(ContractError::InvalidScale(factor));
        }
        Ok(Contract {
            pay_low_report: self.pay_low_report.iter().map(|v| v * factor).collect(),
            pay_high_report: self.pay_high_report.iter().map(|v| v * factor).collect(),
        })
    }

    /// Exchanges the two report rows: the contract an agent effectively faces
    /// when it flips every report.
    pub fn swapped(&self) -> Self {
        Contract {
            pay_low_report: self.pay_high_report.clone(),
            pay_high_report: self.pay_low_report.clone(),
        }
    }

    /// Mirror image: cell (low, i) maps to (high, n-1-i) and vice versa. In a
    /// mirror-symmetric environment the mirrored contract induces the same
    /// agent problem with the state labels exchanged.
    pub fn mirrored(&self) -> Self {
        let mut pay_low_report: Vec<f64> = self.pay_high_report.clone();
        let mut pay_high_report: Vec<f64> = self.pay_low_report.clone();
        pay_low_report.reverse();
        pay_high_report.reverse();
        Contract {
            pay_low_report,
            pay_high_report,
        }
    }

    /// True when the contract equals its own mirror image within `tol`.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let n = self.len();
        (0..n).all(|i| (self.pay_low_report[i] - self.pay_high_report[n - 1 - i]).abs() <= tol)
    }

    /// Averages the contract with its mirror image. In a mirror-symmetric
    /// environment this preserves the expected payment and the induced effort
    /// incentives while producing a mirror-symmetric contract; elsewhere it is
    /// just the matrix average.
    pub fn symmetrize(&self) -> Self {
        let mirrored = self.mirrored();
        let avg = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
        };
        Contract {
            pay_low_report: avg(&self.pay_low_report, &mirrored.pay_low_report),
            pay_high_report: avg(&self.pay_high_report, &mirrored.pay_high_report),
        }
    }

    /// Returns the contract re-labeled so that truthful reporting is the
    /// (weakly) rewarded orientation: when the effort slope under truthful
    /// reporting is negative, the report rows are exchanged, which negates the
    /// slope without changing what any reporting strategy can earn.
    pub fn canonical_orient(&self, env: &Environment) -> Self {
        if agent::effort_slope(env, self) < 0.0 {
            self.swapped()
        } else {
            self.clone()
        }
    }

    /// Structural classification of the payment matrix; see [`ContractClass`].
    ///
    /// # Panics
    /// If the contract length does not match the environment's support.
    pub fn classify(&self, env: &Environment, tol: f64) -> ContractClass {
        assert_eq!(
            self.len(),
            env.len(),
            "contract defined over {} return levels, environment has {}",
            self.len(),
            env.len()
        );

        let mut positives: Vec<f64> = self
            .pay_low_report
            .iter()
            .chain(&self.pay_high_report)
            .copied()
            .filter(|&v| v > tol)
            .collect();
        let positive_cells = positives.len();
        positives.sort_by(f64::total_cmp);

        let mut distinct_positive_values = 0;
        let mut cluster_top = f64::NEG_INFINITY;
        for &v in &positives {
            if distinct_positive_values == 0 || v - cluster_top > tol * cluster_top.max(1.0) {
                distinct_positive_values += 1;
            }
            cluster_top = v;
        }

        ContractClass {
            positive_cells,
            distinct_positive_values,
            is_three_tier: distinct_positive_values <= 2,
            is_symmetric: self.is_mirror_symmetric(tol),
            threshold_form: self.threshold_form(env, tol),
        }
    }

    /// Detects threshold (confirmation bonus) form: a single bonus level `b`
    /// paid on the low report exactly when the return lands at or below some
    /// cutoff, and on the high report exactly when it lands at or above some
    /// cutoff. Either side may be absent; a contract with no positive cells is
    /// not in threshold form.
    fn threshold_form(&self, env: &Environment, tol: f64) -> Option<ThresholdForm> {
        let low_idx = positive_indices(&self.pay_low_report, tol);
        let high_idx = positive_indices(&self.pay_high_report, tol);
        if low_idx.is_empty() && high_idx.is_empty() {
            return None;
        }
        // Low-report bonuses must fill a prefix of the support, high-report
        // bonuses a suffix: "pay when the realized return confirms the report".
        if !low_idx.iter().copied().eq(0..low_idx.len()) {
            return None;
        }
        let n = self.len();
        if !high_idx.iter().copied().eq(n - high_idx.len()..n) {
            return None;
        }

        let values: Vec<f64> = low_idx
            .iter()
            .map(|&i| self.pay_low_report[i])
            .chain(high_idx.iter().map(|&i| self.pay_high_report[i]))
            .collect();
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi - lo > tol * hi.max(1.0) {
            return None;
        }

        let bonus = values.iter().sum::<f64>() / values.len() as f64;
        Some(ThresholdForm {
            bonus,
            low_threshold: low_idx.last().map(|&i| env.support()[i]),
            high_threshold: high_idx.first().map(|&i| env.support()[i]),
        })
    }

    /// Wraps the contract in the investment lottery described on
    /// [`LiftedContract`], scaling payments by `1/epsilon` so that expected
    /// payments are unchanged for every agent strategy.
    pub fn lift(&self, epsilon: f64) -> Result<LiftedContract, ContractError> {
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > 1.0 {
            return Err(ContractError::InvalidEpsilon(epsilon));
        }
        Ok(LiftedContract {
            epsilon,
            scaled: self.scale(1.0 / epsilon)?,
        })
    }
}

fn positive_indices(payments: &[f64], tol: f64) -> Vec<usize> {
    payments
        .iter()
        .enumerate()
        .filter(|&(_, &v)| v > tol)
        .map(|(i, _)| i)
        .collect()
}

/// Structural features of a contract, produced by [`Contract::classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContractClass {
    /// Number of cells paying strictly more than the tolerance.
    pub positive_cells: usize,
    /// Number of distinct positive payment levels (tolerance-clustered).
    pub distinct_positive_values: usize,
    /// True when payments take at most three values including zero, i.e. at
    /// most two distinct positive levels.
    pub is_three_tier: bool,
    /// True when the contract equals its mirror image.
    pub is_symmetric: bool,
    /// Present when the contract is a confirmation-bonus threshold contract.
    pub threshold_form: Option<ThresholdForm>,
}

/// A single-bonus threshold contract: the agent earns `bonus` when its report
/// is confirmed by an extreme enough realized return.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdForm {
    /// The common payment level.
    pub bonus: f64,
    /// Largest return that still triggers the bonus after a low report, if
    /// the low report pays at all.
    pub low_threshold: Option<f64>,
    /// Smallest return that triggers the bonus after a high report, if the
    /// high report pays at all.
    pub high_threshold: Option<f64>,
}

/// A base contract embedded in an investment lottery.
///
/// The principal commits to a coin flip after hearing the report: with
/// probability `1 - epsilon` the usual posterior rule decides the investment
/// and nothing is paid; with probability `epsilon` the principal invests
/// unconditionally and pays the base contract scaled up by `1 / epsilon`.
/// Because payments only occur in the always-invest branch, every reporting
/// strategy at every accuracy earns exactly what it earns under the base
/// contract — the agent's problem is untouched — while the principal's gross
/// return moves from `value(gamma)` to the epsilon-mixture with the prior
/// mean. The point of the construction: payments can be made contingent on
/// realized returns even after reports that would normally stop the project.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedContract {
    epsilon: f64,
    scaled: Contract,
}

impl LiftedContract {
    /// Probability of the unconditional-investment branch.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// The scaled contract paid inside the always-invest branch.
    pub fn scaled(&self) -> &Contract {
        &self.scaled
    }

    /// Recovers the base contract the lift was built from.
    pub fn base(&self) -> Contract {
        self.scaled
            .scale(self.epsilon)
            .expect("epsilon validated at construction")
    }

    /// Expected payment to an agent playing `strategy` at `accuracy`.
    pub fn expected_payment(
        &self,
        env: &Environment,
        accuracy: f64,
        strategy: ReportStrategy,
    ) -> f64 {
        self.epsilon * agent::expected_payment(env, &self.scaled, accuracy, strategy)
    }

    /// Principal's gross expected return under the lottery when the agent
    /// researches at `accuracy` and reports truthfully.
    pub fn gross_value(&self, env: &Environment, accuracy: f64) -> f64 {
        (1.0 - self.epsilon) * env.principal_value(accuracy) + self.epsilon * env.prior_mean()
    }

    /// Principal's net payoff: gross value minus the expected payment.
    pub fn net_return(&self, env: &Environment, accuracy: f64, strategy: ReportStrategy) -> f64 {
        self.gross_value(env, accuracy) - self.expected_payment(env, accuracy, strategy)
    }
}
