//! The linear-share benchmark family.
//!
//! A simple, widely used alternative to designed contracts: the agent
//! receives a fixed fraction `share` of the realized return of whatever
//! option the principal picks — `share * v` when the project is undertaken,
//! `share * 1` when the money stays safe. The only design freedom is the
//! share.
//!
//! For a given share the outcome is an equilibrium fixed point: the
//! principal's investment rule shapes the agent's payments, the payments
//! drive the agent's accuracy, and the resulting posteriors must reproduce
//! the rule (invest exactly when the posterior mean beats the safe return,
//! ties to safe). Each candidate rule is checked for consistency, the agent's
//! reporting must be truthful (a share contract can also invite babbling,
//! which discards the candidate), and when several rules are consistent the
//! principal-preferred one is kept.

use super::SolverError;
use crate::agent::{self, ReportStrategy};
use crate::contract::Contract;
use crate::env::{CostSpec, Environment, Report};

/// The principal's investment behaviour as a function of the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinearRule {
    /// Never invest; both reports pay the safe-return share.
    Never,
    /// Invest exactly on a high report — the screening rule.
    OnHigh,
    /// Invest regardless of the report.
    Always,
}

impl LinearRule {
    const ALL: [LinearRule; 3] = [LinearRule::Never, LinearRule::OnHigh, LinearRule::Always];

    fn invests(self, report: Report) -> bool {
        match self {
            LinearRule::Never => false,
            LinearRule::OnHigh => report == Report::High,
            LinearRule::Always => true,
        }
    }
}

impl std::fmt::Display for LinearRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            LinearRule::Never => "never-invest",
            LinearRule::OnHigh => "invest-on-high",
            LinearRule::Always => "always-invest",
        };
        write!(f, "{name}")
    }
}

/// The best linear-share outcome: the chosen share and the equilibrium it
/// induces.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearShare {
    /// Fraction of the realized return paid to the agent.
    pub share: f64,
    /// The consistent investment rule at the optimum.
    pub rule: LinearRule,
    /// Equilibrium accuracy of the agent.
    pub accuracy: f64,
    /// Principal's gross expected return.
    pub gross_value: f64,
    /// Expected payment to the agent.
    pub payment: f64,
    /// `gross_value - payment`.
    pub net_payoff: f64,
}

/// Payment matrix the agent faces under a share and an investment rule: a
/// non-investing report pays the share of the safe return in every state, an
/// investing one pays the share of each possible project return.
fn effective_contract(env: &Environment, share: f64, rule: LinearRule) -> Contract {
    let row = |invest: bool| -> Vec<f64> {
        if invest {
            env.support().iter().map(|v| share * v).collect()
        } else {
            vec![share; env.len()]
        }
    };
    Contract::new(
        row(rule.invests(Report::Low)),
        row(rule.invests(Report::High)),
    )
    .expect("share payments are non-negative")
}

/// The principal-preferred consistent equilibrium at a fixed share, if any
/// rule admits one.
fn equilibrium_at(env: &Environment, cost: &CostSpec, share: f64) -> Option<LinearShare> {
    let mut best: Option<LinearShare> = None;
    for rule in LinearRule::ALL {
        let contract = effective_contract(env, share, rule);
        let response = agent::best_response(env, cost, &contract);
        if response.strategy != ReportStrategy::Truthful {
            continue;
        }
        let consistent = Report::ALL
            .iter()
            .all(|&report| env.invests(response.accuracy, report) == rule.invests(report));
        if !consistent {
            continue;
        }
        // Consistency makes the rule identical to the posterior rule, so the
        // gross value is the usual screening value at this accuracy.
        let gross_value = env.principal_value(response.accuracy);
        let candidate = LinearShare {
            share,
            rule,
            accuracy: response.accuracy,
            gross_value,
            payment: response.expected_payment,
            net_payoff: gross_value - response.expected_payment,
        };
        if best
            .as_ref()
            .is_none_or(|b| candidate.net_payoff > b.net_payoff)
        {
            best = Some(candidate);
        }
    }
    best
}

/// Optimizes the share by a three-stage grid zoom: a coarse pass over
/// `[0, 1]`, then two centered refinements, each 100x finer, down to a share
/// resolution of 1e-7. Grids rather than smooth search because the
/// equilibrium net payoff can kink or jump where the consistent rule or the
/// accuracy cap switches; zooming only assumes the optimum is not hidden
/// between adjacent coarse grid points.
///
/// A share of zero always admits a consistent equilibrium (the agent stays
/// uninformed and the prior decides), so the family is never empty and its
/// value is at least the uninformed benchmark.
pub fn optimal_linear(env: &Environment, cost: &CostSpec) -> Result<LinearShare, SolverError> {
    let mut best: Option<LinearShare> = None;
    let scan = |lo: f64, hi: f64, steps: usize, best: &mut Option<LinearShare>| {
        for i in 0..=steps {
            let share = (lo + (hi - lo) * i as f64 / steps as f64).clamp(0.0, 1.0);
            if let Some(candidate) = equilibrium_at(env, cost, share) {
                if best
                    .as_ref()
                    .is_none_or(|b| candidate.net_payoff > b.net_payoff)
                {
                    *best = Some(candidate);
                }
            }
        }
    };

    scan(0.0, 1.0, 1000, &mut best);
    for half_width in [1e-3, 1e-5] {
        let Some(center) = best.as_ref().map(|b| b.share) else {
            break;
        };
        scan(center - half_width, center + half_width, 200, &mut best);
    }

    best.ok_or_else(|| {
        SolverError::CrossCheck("no consistent linear-share equilibrium found".into())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_close, cost_k15, env_crossing};

    #[test]
    fn crossing_benchmark_share() {
        let env = env_crossing();
        let result = optimal_linear(&env, &cost_k15()).unwrap();
        assert_eq!(result.rule, LinearRule::OnHigh);
        assert_close(result.share, 1.0 / 12.0, 1e-6);
        assert_close(result.accuracy, 0.75, 1e-6);
        assert_close(result.payment, 11.0 / 120.0, 1e-7);
        assert_close(result.gross_value, 1.1, 1e-7);
        assert_close(result.net_payoff, 121.0 / 120.0, 1e-9);
    }

    #[test]
    fn the_equilibrium_agent_is_truthful_by_margin() {
        // At the optimal share the truthful utility 7/80 strictly beats the
        // best babbling payoff 1/12.
        let env = env_crossing();
        let contract = effective_contract(&env, 1.0 / 12.0, LinearRule::OnHigh);
        let response = agent::best_response(&env, &cost_k15(), &contract);
        assert_eq!(response.strategy, ReportStrategy::Truthful);
        assert_close(response.accuracy, 0.75, 1e-9);
        assert_close(response.utility, 7.0 / 80.0, 1e-12);
        let shirk = agent::shirk_values(&env, &contract);
        assert_close(shirk.max(), 1.0 / 12.0, 1e-12);
    }

    #[test]
    fn cheap_effort_caps_accuracy() {
        // k = 0.04: the share rises until the agent hits full accuracy.
        let env = env_crossing();
        let cost = CostSpec::quadratic(0.04).unwrap();
        let result = optimal_linear(&env, &cost).unwrap();
        assert_close(result.share, 0.1, 1e-6);
        assert_close(result.accuracy, 1.0, 1e-6);
        assert_close(result.net_payoff, 1.08, 1e-7);
    }

    #[test]
    fn expensive_effort_pays_nothing() {
        let env = env_crossing();
        let cost = CostSpec::quadratic(0.1).unwrap();
        let result = optimal_linear(&env, &cost).unwrap();
        assert_close(result.share, 0.0, 1e-9);
        assert_close(result.accuracy, 0.5, 1e-9);
        assert_close(result.net_payoff, 1.0, 1e-12);
        assert_eq!(result.rule, LinearRule::Never);
    }

    #[test]
    fn free_effort_reaches_first_best() {
        let env = env_crossing();
        let cost = CostSpec::quadratic(0.0).unwrap();
        let result = optimal_linear(&env, &cost).unwrap();
        assert_close(result.share, 0.0, 1e-9);
        assert_close(result.accuracy, 1.0, 1e-12);
        assert_close(result.net_payoff, 1.2, 1e-12);
        assert_eq!(result.rule, LinearRule::OnHigh);
    }

    #[test]
    fn favorable_prior_falls_back_to_always_investing() {
        // Prior mean 1.16 > 1: with no screening the principal still invests,
        // so the benchmark is the prior mean rather than the safe return.
        let env = Environment::new(
            0.7,
            vec![0.0, 1.0, 2.0],
            vec![0.6, 0.2, 0.2],
            vec![0.2, 0.2, 0.6],
        )
        .unwrap();
        let result = optimal_linear(&env, &cost_k15()).unwrap();
        assert!(result.net_payoff >= 1.16 - 1e-12);
        // Whatever wins, the reported rule must match the posteriors it
        // induces.
        for report in Report::ALL {
            assert_eq!(
                env.invests(result.accuracy, report),
                result.rule.invests(report)
            );
        }
    }

    #[test]
    fn rules_price_the_safe_side_correctly() {
        let env = env_crossing();
        let contract = effective_contract(&env, 0.2, LinearRule::Never);
        // Both reports pay the share of the safe return in every state.
        for report in Report::ALL {
            for i in 0..3 {
                assert_close(contract.pay(report, i), 0.2, 1e-15);
            }
        }
        let screening = effective_contract(&env, 0.2, LinearRule::OnHigh);
        assert_close(screening.pay(Report::High, 2), 0.4, 1e-15);
        assert_close(screening.pay(Report::Low, 2), 0.2, 1e-15);
    }
}
