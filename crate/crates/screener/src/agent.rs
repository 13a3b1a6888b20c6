//! The agent's side of the problem: what a contract pays under each
//! reporting strategy, and which (accuracy, strategy) pair the agent actually
//! picks.
//!
//! Fix an environment with prior `p` on the high state, state pmfs `f_low`
//! and `f_high`, and a contract with payment vectors `r_low` and `r_high`.
//! Define the four state-by-report payment aggregates
//!
//! ```text
//! ll = f_low  . r_low     lh = f_low  . r_high
//! hl = f_high . r_low     hh = f_high . r_high
//! ```
//!
//! A truthful agent at accuracy `gamma` earns, in expectation,
//!
//! ```text
//! pay(gamma) = (1-p) [gamma ll + (1-gamma) lh] + p [gamma hh + (1-gamma) hl]
//! ```
//!
//! which is *linear* in accuracy: `pay(gamma) = pay(1/2) + (gamma - 1/2) d`
//! with effort slope `d = (1-p)(ll - lh) + p(hh - hl)`. Flipping every report
//! negates the slope around the same midpoint, and ignoring the signal
//! altogether earns one of the constants `R_low = (1-p) ll + p hl` or
//! `R_high = (1-p) lh + p hh`. Best responses therefore reduce to comparing a
//! handful of candidate points: line endpoints, the stationary point where
//! marginal cost equals the slope, and the two constants.

use crate::contract::Contract;
use crate::env::{assert_accuracy, dot, CostSpec, Environment};

/// Relative tolerance for utility ties in [`best_response`], applied only
/// when comparing *across* reporting strategies. Those ties are real: at an
/// optimum the shirking constraints often bind exactly, leaving the agent
/// indifferent between researching and guessing, and float noise must not
/// turn the indifference into a strict preference either way. Indifference
/// resolves toward higher accuracy, then toward truthful reporting.
///
/// Within one strategy the comparison is exact. Banding it would be wrong,
/// not just unnecessary: near a contract where the stationary accuracy grazes
/// the cap, a banded within-strategy tie would snap the agent to the cap
/// while being paid the interior line value, letting an outer search shave
/// the payment by `O(sqrt(band))` — a pure artifact of the tolerance.
const TIE_EPS: f64 = 1e-11;

/// A pure reporting strategy. Mixtures never help the agent: payments are
/// linear in the mixing weights, so some pure strategy always weakly wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportStrategy {
    /// Repeat the signal.
    Truthful,
    /// Report the opposite of the signal.
    Flipped,
    /// Report low regardless of the signal (no research needed).
    AlwaysLow,
    /// Report high regardless of the signal.
    AlwaysHigh,
}

impl ReportStrategy {
    pub const ALL: [ReportStrategy; 4] = [
        ReportStrategy::Truthful,
        ReportStrategy::Flipped,
        ReportStrategy::AlwaysLow,
        ReportStrategy::AlwaysHigh,
    ];

    /// Preference order when utilities tie at equal accuracy; lower is
    /// preferred. Truthful first — the informative orientations beat the
    /// babbling ones, matching how ties are broken in the solvers.
    pub(crate) fn priority(self) -> u8 {
        match self {
            ReportStrategy::Truthful => 0,
            ReportStrategy::Flipped => 1,
            ReportStrategy::AlwaysLow => 2,
            ReportStrategy::AlwaysHigh => 3,
        }
    }
}

impl std::fmt::Display for ReportStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ReportStrategy::Truthful => "truthful",
            ReportStrategy::Flipped => "flipped",
            ReportStrategy::AlwaysLow => "always-low",
            ReportStrategy::AlwaysHigh => "always-high",
        };
        write!(f, "{name}")
    }
}

/// Expected payment as a function of accuracy, for one reporting orientation:
/// `at(gamma) = at_half + (gamma - 1/2) * slope`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaymentLine {
    /// Expected payment at the uninformative accuracy 1/2.
    pub at_half: f64,
    /// Marginal expected payment per unit of accuracy.
    pub slope: f64,
}

impl PaymentLine {
    pub fn at(&self, accuracy: f64) -> f64 {
        assert_accuracy(accuracy);
        self.at_half + (accuracy - 0.5) * self.slope
    }
}

/// Expected payments from ignoring the signal entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShirkValues {
    pub always_low: f64,
    pub always_high: f64,
}

impl ShirkValues {
    pub fn max(&self) -> f64 {
        self.always_low.max(self.always_high)
    }
}

fn components(env: &Environment, contract: &Contract) -> (f64, f64, f64, f64) {
    debug_assert_eq!(env.len(), contract.len());
    let r_low = contract.payments(crate::env::Report::Low);
    let r_high = contract.payments(crate::env::Report::High);
    let ll = dot(env.pmf_low(), r_low);
    let lh = dot(env.pmf_low(), r_high);
    let hl = dot(env.pmf_high(), r_low);
    let hh = dot(env.pmf_high(), r_high);
    (ll, lh, hl, hh)
}

/// Expected payment to a truthful agent, as a line in accuracy.
pub fn truthful_payment_line(env: &Environment, contract: &Contract) -> PaymentLine {
    let (ll, lh, hl, hh) = components(env, contract);
    let p = env.prior_high();
    let slope = (1.0 - p) * (ll - lh) + p * (hh - hl);
    let at_half = 0.5 * ((1.0 - p) * (ll + lh) + p * (hh + hl));
    PaymentLine { at_half, slope }
}

/// Marginal expected payment per unit of accuracy under truthful reporting —
/// the quantity the moral-hazard constraint pins down.
pub fn effort_slope(env: &Environment, contract: &Contract) -> f64 {
    truthful_payment_line(env, contract).slope
}

/// Payments from the two signal-independent strategies.
pub fn shirk_values(env: &Environment, contract: &Contract) -> ShirkValues {
    let (ll, lh, hl, hh) = components(env, contract);
    let p = env.prior_high();
    ShirkValues {
        always_low: (1.0 - p) * ll + p * hl,
        always_high: (1.0 - p) * lh + p * hh,
    }
}

/// Expected payment at the given accuracy under the given reporting strategy.
pub fn expected_payment(
    env: &Environment,
    contract: &Contract,
    accuracy: f64,
    strategy: ReportStrategy,
) -> f64 {
    assert_accuracy(accuracy);
    let line = truthful_payment_line(env, contract);
    match strategy {
        ReportStrategy::Truthful => line.at(accuracy),
        ReportStrategy::Flipped => line.at_half - (accuracy - 0.5) * line.slope,
        ReportStrategy::AlwaysLow => shirk_values(env, contract).always_low,
        ReportStrategy::AlwaysHigh => shirk_values(env, contract).always_high,
    }
}

/// Agent utility: expected payment minus effort cost.
pub fn utility(
    env: &Environment,
    cost: &CostSpec,
    contract: &Contract,
    accuracy: f64,
    strategy: ReportStrategy,
) -> f64 {
    expected_payment(env, contract, accuracy, strategy) - cost.cost(accuracy)
}

/// The agent's chosen accuracy and reporting strategy under a contract.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub accuracy: f64,
    pub strategy: ReportStrategy,
    pub expected_payment: f64,
    pub utility: f64,
}

/// Computes the agent's best response to a contract.
///
/// Payment is linear and cost convex in accuracy, so for each reporting
/// orientation the utility maximum sits at an endpoint of `[1/2, 1]` or at
/// the stationary accuracy where marginal cost equals the payment slope; the
/// champion accuracy per orientation is found by exact comparison (exact
/// ties to higher accuracy). Signal-independent strategies never research.
/// The four per-strategy champions are then compared with ties within a
/// relative [`TIE_EPS`] resolved toward higher accuracy and then toward
/// truthful reporting.
pub fn best_response(env: &Environment, cost: &CostSpec, contract: &Contract) -> BestResponse {
    let line = truthful_payment_line(env, contract);
    let shirk = shirk_values(env, contract);

    // Champion accuracy for an informative orientation with the given
    // payment slope. The midpoint payment is a constant shift, so it drops
    // out of the within-orientation comparison.
    let champion = |slope: f64| -> f64 {
        let mut candidates = vec![0.5, 1.0];
        if slope > 0.0 {
            if let Ok(stationary) = cost.inverse_marginal(slope) {
                candidates.push(stationary);
            }
            // If the slope exceeds the largest marginal cost the maximum is
            // the right endpoint, which is already in the list.
        }
        let gain = |gamma: f64| (gamma - 0.5) * slope - cost.cost(gamma);
        candidates
            .into_iter()
            .max_by(|a, b| gain(*a).total_cmp(&gain(*b)).then_with(|| a.total_cmp(b)))
            .expect("endpoint candidates are always present")
    };

    let candidates = [
        (ReportStrategy::Truthful, champion(line.slope)),
        (ReportStrategy::Flipped, champion(-line.slope)),
        (ReportStrategy::AlwaysLow, 0.5),
        (ReportStrategy::AlwaysHigh, 0.5),
    ];

    let evaluate = |strategy: ReportStrategy, accuracy: f64| -> f64 {
        let payment = match strategy {
            ReportStrategy::Truthful => line.at(accuracy),
            ReportStrategy::Flipped => line.at_half - (accuracy - 0.5) * line.slope,
            ReportStrategy::AlwaysLow => shirk.always_low,
            ReportStrategy::AlwaysHigh => shirk.always_high,
        };
        payment - cost.cost(accuracy)
    };

    let best_utility = candidates
        .iter()
        .map(|&(s, a)| evaluate(s, a))
        .fold(f64::NEG_INFINITY, f64::max);
    let tie_band = TIE_EPS * (1.0 + best_utility.abs());

    let (strategy, accuracy) = candidates
        .into_iter()
        .filter(|&(s, a)| evaluate(s, a) >= best_utility - tie_band)
        .max_by(|&(s1, a1), &(s2, a2)| {
            a1.total_cmp(&a2)
                .then_with(|| s2.priority().cmp(&s1.priority()))
        })
        .expect("candidate list is never empty");

    let expected_payment = expected_payment(env, contract, accuracy, strategy);
    BestResponse {
        accuracy,
        strategy,
        expected_payment,
        utility: expected_payment - cost.cost(accuracy),
    }
}
