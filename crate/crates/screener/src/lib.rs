//! Optimal compensation for delegated investment screening.
//!
//! A principal allocates one unit of capital between a safe asset with gross
//! return 1 and a risky asset whose return is drawn from one of two known
//! finite distributions — a high state with conditional mean above 1 and a
//! low state with conditional mean below 1. The principal cannot observe the
//! state, but can hire an agent who chooses how accurately to learn it: the
//! agent picks an accuracy `gamma` in `[1/2, 1]` at convex effort cost, sees
//! a binary signal that matches the state with probability `gamma`, and
//! sends a report. Effort and signal are private; contracts can condition
//! only on the report and the realized return, and payments are non-negative
//! (the agent has no money to post).
//!
//! The crate answers three questions about this delegation problem:
//!
//! * **Implementation** — what is the cheapest contract making a given
//!   accuracy and truthful reporting a best response? Solved two independent
//!   ways: a hand-rolled dense simplex over the moral-hazard program
//!   ([`solver::min_payment_general`]) and a closed form for environments
//!   symmetric about the safe return ([`solver::min_payment_symmetric`]).
//!   With strictly convex costs the optimum pays on at most two
//!   (report, return) cells, and under a monotone likelihood ratio it is a
//!   threshold bonus: a flat payment when a low report is followed by a low
//!   enough return or a high report by a high enough one.
//! * **Design** — which accuracy maximizes screening value net of payments
//!   ([`solver::optimize_accuracy`]), and how does the optimum compare to
//!   the best linear equity share ([`solver::linear::optimal_linear`],
//!   [`solver::gap_ratio`])? Ratios land in `[1, 2]`.
//! * **Verification** — does an exhaustive grid search over sparse contracts
//!   agree ([`oracle::grid_optimal_contract`])? The oracle shares no code
//!   with the analytic routes and is used throughout the tests.
//!
//! Numerical conventions: probabilities are validated to within `1e-12`,
//! solver cross-checks use relative `1e-8` bands, and all searches break
//! ties deterministically, so every public function is reproducible run to
//! run and across thread counts.

#![forbid(unsafe_code)]

pub mod agent;
pub mod contract;
pub mod env;
pub mod oracle;
pub mod solver;

#[cfg(test)]
pub(crate) mod testutil;

pub use agent::{
    best_response, effort_slope, expected_payment, shirk_values, truthful_payment_line, utility,
    BestResponse, PaymentLine, ReportStrategy, ShirkValues,
};
pub use contract::{Contract, ContractClass, ContractError, LiftedContract, ThresholdForm};
pub use env::{CostError, CostSpec, Environment, EnvironmentError, Report};
pub use oracle::{grid_best_response, grid_optimal_contract, GridSpec, OracleError, OracleResult};
pub use solver::linear::{optimal_linear, LinearRule, LinearShare};
pub use solver::random::{random_environment, random_symmetric_mlrp_environment};
pub use solver::{
    gap_ratio, min_payment_general, min_payment_symmetric, optimize_accuracy, ContractFamily,
    Diagnostics, GapReport, ImplementationProblem, Implementor, SearchOptions, SolveResult,
    SolverError,
};
