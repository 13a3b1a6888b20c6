//! Problem data: the investment environment and the agent's effort cost.
//!
//! A principal holds one unit of capital and chooses between a safe option
//! with a certain return (normalized to 1) and a risky project whose return
//! depends on an unknown binary state. In the high state the return is drawn
//! from `pmf_high` over a common finite `support`, in the low state from
//! `pmf_low`. Before deciding, the principal hears a report from an agent who
//! privately researches the project: the agent picks an accuracy
//! `gamma in [1/2, 1]` and observes a binary signal that matches the true
//! state with probability `gamma`, at effort cost described by a [`CostSpec`].
//!
//! Everything downstream (agent behaviour, contract pricing, the solvers)
//! consumes a validated [`Environment`], so all structural checks live here.

use serde::Deserialize;
use thiserror::Error;

/// Absolute tolerance used for probability normalization and the structural
/// symmetry checks. Inputs further away than this are rejected rather than
/// silently repaired.
pub const PROB_TOL: f64 = 1e-12;

/// The agent's report (equivalently, the signal realization it claims).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Report {
    /// "The project looks bad" — signal associated with the low state.
    Low,
    /// "The project looks good" — signal associated with the high state.
    High,
}

impl Report {
    /// Both reports, in the canonical order (`Low` before `High`).
    pub const ALL: [Report; 2] = [Report::Low, Report::High];
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Report::Low => write!(f, "low"),
            Report::High => write!(f, "high"),
        }
    }
}

/// Why an [`Environment`] was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvironmentError {
    #[error("prior probability of the high state must lie strictly inside (0, 1), got {0}")]
    DegeneratePrior(f64),
    #[error("support must contain at least two return levels, got {0}")]
    SupportTooSmall(usize),
    #[error(
        "support and pmf lengths must match: support {support}, pmf_low {low}, pmf_high {high}"
    )]
    LengthMismatch {
        support: usize,
        low: usize,
        high: usize,
    },
    #[error("support values must be finite and non-negative, got {value} at index {index}")]
    InvalidSupportValue { index: usize, value: f64 },
    #[error("support must be strictly increasing, violated at index {0}")]
    SupportNotIncreasing(usize),
    #[error("{which} pmf entry at index {index} is negative or non-finite: {value}")]
    InvalidPmfEntry {
        which: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{which} pmf sums to {sum}, further than {PROB_TOL} from 1")]
    NonNormalizedPmf { which: &'static str, sum: f64 },
    #[error("support point {index} has zero probability in both states")]
    DegenerateSupportPoint { index: usize },
    #[error(
        "screening is only meaningful when the low-state mean is below the safe return and the \
         high-state mean above it; got mean_low {mean_low}, mean_high {mean_high}"
    )]
    MeanConditionViolated { mean_low: f64, mean_high: f64 },
}

/// Unvalidated environment data as it appears in config files.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawEnvironment {
    /// Prior probability of the high state.
    pub prior_high: f64,
    /// Possible returns of the risky project, strictly increasing, all >= 0.
    pub support: Vec<f64>,
    /// Return distribution conditional on the low state.
    pub pmf_low: Vec<f64>,
    /// Return distribution conditional on the high state.
    pub pmf_high: Vec<f64>,
}

/// A validated screening environment.
///
/// Invariants enforced at construction:
/// * `prior_high` lies strictly inside `(0, 1)`;
/// * `support` is strictly increasing with non-negative entries;
/// * both pmfs are non-negative and sum to 1 within [`PROB_TOL`]
///   (they are renormalized when the deviation is below tolerance);
/// * every support point carries probability in at least one state;
/// * `mean_low < 1 < mean_high`, i.e. research genuinely matters: an
///   uninformed posterior cannot rank the project the same way in both states.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawEnvironment")]
pub struct Environment {
    prior_high: f64,
    support: Vec<f64>,
    pmf_low: Vec<f64>,
    pmf_high: Vec<f64>,
    mean_low: f64,
    mean_high: f64,
}

impl TryFrom<RawEnvironment> for Environment {
    type Error = EnvironmentError;

    fn try_from(raw: RawEnvironment) -> Result<Self, Self::Error> {
        Environment::new(raw.prior_high, raw.support, raw.pmf_low, raw.pmf_high)
    }
}

fn check_pmf(which: &'static str, pmf: &mut [f64]) -> Result<(), EnvironmentError> {
    for (index, &value) in pmf.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(EnvironmentError::InvalidPmfEntry {
                which,
                index,
                value,
            });
        }
    }
    let sum: f64 = pmf.iter().sum();
    if (sum - 1.0).abs() > PROB_TOL {
        return Err(EnvironmentError::NonNormalizedPmf { which, sum });
    }
    for value in pmf.iter_mut() {
        *value /= sum;
    }
    Ok(())
}

impl Environment {
    /// Validates and builds an environment. This is the only way to obtain an
    /// [`Environment`], so downstream code may rely on the invariants above.
    pub fn new(
        prior_high: f64,
        support: Vec<f64>,
        pmf_low: Vec<f64>,
        pmf_high: Vec<f64>,
    ) -> Result<Self, EnvironmentError> {
        if !prior_high.is_finite() || prior_high <= 0.0 || prior_high >= 1.0 {
            return Err(EnvironmentError::DegeneratePrior(prior_high));
        }
        if support.len() < 2 {
            return Err(EnvironmentError::SupportTooSmall(support.len()));
        }
        if support.len() != pmf_low.len() || support.len() != pmf_high.len() {
            return Err(EnvironmentError::LengthMismatch {
                support: support.len(),
                low: pmf_low.len(),
                high: pmf_high.len(),
            });
        }
        for (index, &value) in support.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(EnvironmentError::InvalidSupportValue { index, value });
            }
            if index > 0 && value <= support[index - 1] {
                return Err(EnvironmentError::SupportNotIncreasing(index));
            }
        }

        let mut pmf_low = pmf_low;
        let mut pmf_high = pmf_high;
        check_pmf("pmf_low", &mut pmf_low)?;
        check_pmf("pmf_high", &mut pmf_high)?;

        for index in 0..support.len() {
            if pmf_low[index] <= 0.0 && pmf_high[index] <= 0.0 {
                return Err(EnvironmentError::DegenerateSupportPoint { index });
            }
        }

        let mean_low = dot(&pmf_low, &support);
        let mean_high = dot(&pmf_high, &support);
        if !(mean_low < 1.0 && mean_high > 1.0) {
            return Err(EnvironmentError::MeanConditionViolated {
                mean_low,
                mean_high,
            });
        }

        Ok(Environment {
            prior_high,
            support,
            pmf_low,
            pmf_high,
            mean_low,
            mean_high,
        })
    }

    /// Number of points in the return support.
    pub fn len(&self) -> usize {
        self.support.len()
    }

    /// True when the support is empty; never holds for a validated value but
    /// keeps clippy and defensive callers honest.
    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn prior_high(&self) -> f64 {
        self.prior_high
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn pmf_low(&self) -> &[f64] {
        &self.pmf_low
    }

    pub fn pmf_high(&self) -> &[f64] {
        &self.pmf_high
    }

    /// Expected risky return in the low state.
    pub fn mean_low(&self) -> f64 {
        self.mean_low
    }

    /// Expected risky return in the high state.
    pub fn mean_high(&self) -> f64 {
        self.mean_high
    }

    /// Unconditional expected risky return.
    pub fn prior_mean(&self) -> f64 {
        self.prior_high * self.mean_high + (1.0 - self.prior_high) * self.mean_low
    }

    /// Unconditional probability mass of return `index` (mixture of the two
    /// state pmfs under the prior).
    pub fn marginal_pmf(&self, index: usize) -> f64 {
        self.prior_high * self.pmf_high[index] + (1.0 - self.prior_high) * self.pmf_low[index]
    }

    /// Probability that a signal of accuracy `accuracy` realizes as `report`
    /// when the agent reports truthfully.
    ///
    /// # Panics
    /// If `accuracy` is outside `[1/2, 1]`.
    pub fn signal_probability(&self, accuracy: f64, report: Report) -> f64 {
        assert_accuracy(accuracy);
        let high = self.prior_high * accuracy + (1.0 - self.prior_high) * (1.0 - accuracy);
        match report {
            Report::High => high,
            Report::Low => 1.0 - high,
        }
    }

    /// Joint weights `(P[high state & report], P[low state & report])` for a
    /// truthful signal of the given accuracy.
    fn signal_weights(&self, accuracy: f64, report: Report) -> (f64, f64) {
        match report {
            Report::High => (
                self.prior_high * accuracy,
                (1.0 - self.prior_high) * (1.0 - accuracy),
            ),
            Report::Low => (
                self.prior_high * (1.0 - accuracy),
                (1.0 - self.prior_high) * accuracy,
            ),
        }
    }

    /// Posterior expected risky return after observing `report` from a
    /// truthful signal of the given accuracy.
    ///
    /// The conditioning event always has positive probability because the
    /// prior is interior, so no division-by-zero case exists.
    ///
    /// # Panics
    /// If `accuracy` is outside `[1/2, 1]`.
    pub fn posterior_mean(&self, accuracy: f64, report: Report) -> f64 {
        assert_accuracy(accuracy);
        let (w_high, w_low) = self.signal_weights(accuracy, report);
        (w_high * self.mean_high + w_low * self.mean_low) / (w_high + w_low)
    }

    /// Whether the principal invests after hearing `report` at equilibrium
    /// accuracy `accuracy`: invest iff the posterior mean strictly exceeds the
    /// safe return. A posterior exactly equal to 1 resolves to the safe option.
    pub fn invests(&self, accuracy: f64, report: Report) -> bool {
        self.posterior_mean(accuracy, report) > 1.0
    }

    /// Gross expected return to the principal when the agent researches at
    /// `accuracy`, reports truthfully, and the principal invests exactly when
    /// the posterior mean beats the safe return:
    ///
    /// ```text
    /// value(gamma) = sum over reports of  max(P[report], P[report] * E[v | report])
    /// ```
    ///
    /// Written with the probability pulled inside the max so the expression
    /// stays exact even for zero-probability corner cases.
    pub fn principal_value(&self, accuracy: f64) -> f64 {
        assert_accuracy(accuracy);
        Report::ALL
            .iter()
            .map(|&report| {
                let (w_high, w_low) = self.signal_weights(accuracy, report);
                let probability = w_high + w_low;
                let risky = w_high * self.mean_high + w_low * self.mean_low;
                probability.max(risky)
            })
            .sum()
    }

    /// Gross value of deciding on the prior alone (no informative signal).
    pub fn uninformed_value(&self) -> f64 {
        1.0_f64.max(self.prior_mean())
    }

    /// If the environment is mirror-symmetric, returns the center of symmetry.
    ///
    /// Symmetric means: the prior is exactly balanced (within [`PROB_TOL`]),
    /// the support is symmetric about its midpoint `center`, and the low-state
    /// pmf read backwards equals the high-state pmf.
    pub fn symmetry_center(&self) -> Option<f64> {
        if (self.prior_high - 0.5).abs() > PROB_TOL {
            return None;
        }
        let n = self.len();
        let center = 0.5 * (self.support[0] + self.support[n - 1]);
        for i in 0..n {
            if (self.support[i] + self.support[n - 1 - i] - 2.0 * center).abs() > PROB_TOL {
                return None;
            }
            if (self.pmf_low[i] - self.pmf_high[n - 1 - i]).abs() > PROB_TOL {
                return None;
            }
        }
        Some(center)
    }

    /// True when the likelihood ratio `pmf_high[i] / pmf_low[i]` is weakly
    /// increasing across the support, with `x / 0` treated as `+inf` for
    /// `x > 0`. (Both entries zero at a point is ruled out at validation.)
    pub fn has_monotone_likelihood_ratio(&self) -> bool {
        likelihood_ratios_weakly_increasing(&self.pmf_low, &self.pmf_high)
    }
}

/// Cross-multiplied monotonicity test for `pmf_high[i] / pmf_low[i]`.
///
/// `h_i / l_i <= h_j / l_j` is checked as `h_i * l_j <= h_j * l_i`, which
/// also encodes the `+inf` convention for `l_i = 0` without special cases.
fn likelihood_ratios_weakly_increasing(pmf_low: &[f64], pmf_high: &[f64]) -> bool {
    pmf_low
        .windows(2)
        .zip(pmf_high.windows(2))
        .all(|(l, h)| h[0] * l[1] <= h[1] * l[0])
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn assert_accuracy(accuracy: f64) {
    assert!(
        (0.5..=1.0).contains(&accuracy),
        "signal accuracy must lie in [1/2, 1], got {accuracy}"
    );
}

/// Why a [`CostSpec`] was rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("cost coefficient must be finite and non-negative, got {0}")]
    InvalidCoefficient(f64),
    #[error("cost exponent must be finite and at least 1, got {0}")]
    InvalidExponent(f64),
    #[error("marginal cost {requested} is outside the attainable range [0, {max}]")]
    MarginalOutOfRange { requested: f64, max: f64 },
}

/// Unvalidated cost data as it appears in config files.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum RawCostSpec {
    Quadratic { coefficient: f64 },
    Power { coefficient: f64, exponent: f64 },
}

/// Effort cost of signal accuracy: `cost(gamma) = k * (gamma - 1/2)^m`.
///
/// The family covers every cost used by the solvers: zero cost at the
/// uninformative accuracy 1/2, increasing, and convex (`m >= 1`).
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(try_from = "RawCostSpec")]
pub enum CostSpec {
    /// `k * (gamma - 1/2)^2`, the workhorse case.
    Quadratic { coefficient: f64 },
    /// `k * (gamma - 1/2)^m` for any exponent `m >= 1`.
    Power { coefficient: f64, exponent: f64 },
}

impl TryFrom<RawCostSpec> for CostSpec {
    type Error = CostError;

    fn try_from(raw: RawCostSpec) -> Result<Self, Self::Error> {
        match raw {
            RawCostSpec::Quadratic { coefficient } => CostSpec::quadratic(coefficient),
            RawCostSpec::Power {
                coefficient,
                exponent,
            } => CostSpec::power(coefficient, exponent),
        }
    }
}

impl CostSpec {
    /// Quadratic cost with coefficient `k >= 0`.
    pub fn quadratic(coefficient: f64) -> Result<Self, CostError> {
        CostSpec::Quadratic { coefficient }.validated()
    }

    /// Power cost `k * (gamma - 1/2)^m` with `k >= 0`, `m >= 1`.
    pub fn power(coefficient: f64, exponent: f64) -> Result<Self, CostError> {
        CostSpec::Power {
            coefficient,
            exponent,
        }
        .validated()
    }

    /// Validates the parameters; config deserialization funnels through this.
    pub fn validated(self) -> Result<Self, CostError> {
        let k = self.coefficient();
        if !k.is_finite() || k < 0.0 {
            return Err(CostError::InvalidCoefficient(k));
        }
        let m = self.exponent();
        if !m.is_finite() || m < 1.0 {
            return Err(CostError::InvalidExponent(m));
        }
        Ok(self)
    }

    pub fn coefficient(&self) -> f64 {
        match *self {
            CostSpec::Quadratic { coefficient } => coefficient,
            CostSpec::Power { coefficient, .. } => coefficient,
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            CostSpec::Quadratic { .. } => 2.0,
            CostSpec::Power { exponent, .. } => exponent,
        }
    }

    /// Whether the cost is linear in accuracy (`m == 1`), the one case where
    /// marginal cost is constant and best responses are bang-bang.
    pub fn is_linear(&self) -> bool {
        self.exponent() == 1.0
    }

    /// Effort cost at the given accuracy.
    ///
    /// # Panics
    /// If `accuracy` is outside `[1/2, 1]`.
    pub fn cost(&self, accuracy: f64) -> f64 {
        assert_accuracy(accuracy);
        self.coefficient() * (accuracy - 0.5).powf(self.exponent())
    }

    /// Marginal cost `k * m * (gamma - 1/2)^(m - 1)`. For `m == 1` this is the
    /// constant `k`, including at the left endpoint.
    ///
    /// # Panics
    /// If `accuracy` is outside `[1/2, 1]`.
    pub fn marginal_cost(&self, accuracy: f64) -> f64 {
        assert_accuracy(accuracy);
        let k = self.coefficient();
        let m = self.exponent();
        if m == 1.0 {
            return k;
        }
        k * m * (accuracy - 0.5).powf(m - 1.0)
    }

    /// Largest attainable marginal cost, reached at full accuracy.
    pub fn max_marginal_cost(&self) -> f64 {
        self.marginal_cost(1.0)
    }

    /// Accuracy whose marginal cost equals `marginal`, i.e. the first-order
    /// condition of an agent facing a payment line with that slope.
    ///
    /// Conventions for the flat edges of the family:
    /// * `k == 0` (free effort): any accuracy is stationary; returns 1,
    ///   resolving the agent's indifference toward higher accuracy.
    /// * `m == 1` (linear cost): marginal cost is constant, so below it the
    ///   best response is the left endpoint 1/2 and exactly at it the
    ///   indifference again resolves to 1.
    ///
    /// Errors with [`CostError::MarginalOutOfRange`] when `marginal` is
    /// negative or exceeds [`CostSpec::max_marginal_cost`].
    pub fn inverse_marginal(&self, marginal: f64) -> Result<f64, CostError> {
        let k = self.coefficient();
        let m = self.exponent();
        let max = self.max_marginal_cost();
        if !marginal.is_finite() || marginal < 0.0 || marginal > max * (1.0 + 1e-12) + 1e-300 {
            return Err(CostError::MarginalOutOfRange {
                requested: marginal,
                max,
            });
        }
        if k == 0.0 {
            return Ok(1.0);
        }
        if m == 1.0 {
            if (marginal - k).abs() <= 1e-12 * k {
                return Ok(1.0);
            }
            return Ok(0.5);
        }
        let accuracy = 0.5 + (marginal / (k * m)).powf(1.0 / (m - 1.0));
        Ok(accuracy.clamp(0.5, 1.0))
    }
}
