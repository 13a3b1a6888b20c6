//! Acceptance battery: eight end-to-end criteria, one test and one pass
//! line each. The first two and the last criterion drive the installed
//! binary exactly as a user would; the rest exercise the library against
//! independently derived expectations.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tempfile::TempDir;

use screener::{
    best_response, expected_payment, gap_ratio, min_payment_general, min_payment_symmetric,
    optimize_accuracy, random_environment, random_symmetric_mlrp_environment, ContractFamily,
    CostSpec, Environment, ImplementationProblem, Implementor, Report, ReportStrategy,
    SearchOptions,
};

fn quad(k: f64) -> CostSpec {
    CostSpec::quadratic(k).expect("coefficient should be valid")
}

/// The three-return environment where the two state pmfs cross once.
fn crossing_env() -> Environment {
    Environment::new(
        0.5,
        vec![0.0, 1.0, 2.0],
        vec![0.6, 0.2, 0.2],
        vec![0.2, 0.2, 0.6],
    )
    .expect("fixture should validate")
}

/// The five-return environment whose likelihood ratio is humped.
fn humped_env() -> Environment {
    Environment::new(
        0.5,
        vec![0.0, 0.5, 1.0, 1.5, 2.0],
        vec![0.125, 0.375, 0.25, 0.125, 0.125],
        vec![0.125, 0.125, 0.25, 0.375, 0.125],
    )
    .expect("fixture should validate")
}

fn run_binary(args: &[&str]) -> (Output, Duration) {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_screener"))
        .args(args)
        .output()
        .expect("binary should spawn");
    (out, start.elapsed())
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|line| line.split(',').map(str::to_string).collect())
        .collect()
}

fn field(row: &[String], index: usize) -> f64 {
    row[index].parse().expect("field should be numeric")
}

/// Independently tabulated optimal net payoff of the confirmation-bonus
/// family on the crossing environment, per cost coefficient.
fn threshold_curve(k: f64) -> f64 {
    if k <= 0.1 {
        1.2 - 1.5 * k
    } else if k <= 0.2 {
        0.8 + 0.5 * k + 0.02 / k
    } else {
        1.0
    }
}

/// Same for the best linear share; effort becomes unaffordable sooner
/// because a share pays for returns the agent does not control.
fn linear_curve(k: f64) -> f64 {
    if k <= 2.0 / 35.0 {
        1.2 - 3.0 * k
    } else if k <= 0.08 {
        0.5 + 0.02 / k + 3.125 * k
    } else {
        1.0
    }
}

fn positive_cells(result: &screener::SolveResult, env: &Environment) -> Vec<(Report, f64)> {
    let mut cells = Vec::new();
    for report in Report::ALL {
        for (index, &pay) in result.contract.payments(report).iter().enumerate() {
            if pay > 1e-9 {
                cells.push((report, env.support()[index]));
            }
        }
    }
    cells
}

/// Criterion 1: on the crossing preset the binary reproduces the canonical
/// table — both families, all five columns — within 1e-3, in under a second.
#[test]
fn criterion_1_benchmark_table() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("solve.csv");
    let (out, elapsed) = run_binary(&[
        "solve",
        "--preset",
        "paper-sec4",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "solve should exit 0");
    assert!(
        elapsed < Duration::from_secs(1),
        "solve took {elapsed:?}, budget is 1s"
    );

    let rows = read_csv(&csv);
    assert_eq!(
        rows[0],
        ["family", "alpha_or_bonus", "gamma_star", "V", "T", "net"]
    );

    let threshold = rows.iter().find(|r| r[0] == "threshold").unwrap();
    let expected_threshold = [1.0 / 6.0, 1.0, 1.2, 0.1, 1.1];
    for (index, expected) in expected_threshold.iter().enumerate() {
        let got = field(threshold, index + 1);
        assert!(
            (got - expected).abs() <= 1e-3,
            "threshold column {index}: got {got}, expected {expected}"
        );
    }

    let linear = rows.iter().find(|r| r[0] == "linear").unwrap();
    let expected_linear = [1.0 / 12.0, 0.75, 1.1, 11.0 / 120.0, 121.0 / 120.0];
    for (index, expected) in expected_linear.iter().enumerate() {
        let got = field(linear, index + 1);
        assert!(
            (got - expected).abs() <= 1e-3,
            "linear column {index}: got {got}, expected {expected}"
        );
    }

    println!("criterion 1 PASS: benchmark table within 1e-3 in {elapsed:?}");
}

/// Criterion 2: the default coefficient sweep traces both tabulated
/// net-payoff curves within 1e-6, in under ten seconds.
#[test]
fn criterion_2_sweep_curves() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("sweep.csv");
    let (out, elapsed) = run_binary(&[
        "sweep",
        "--preset",
        "paper-sec4",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "sweep should exit 0");
    assert!(
        elapsed < Duration::from_secs(10),
        "sweep took {elapsed:?}, budget is 10s"
    );

    let rows = read_csv(&csv);
    assert_eq!(rows.len(), 1 + 24 * 2, "24 coefficients, two families");
    let mut max_err: f64 = 0.0;
    for row in &rows[1..] {
        let k = field(row, 1);
        let net = field(row, 6);
        let expected = match row[0].as_str() {
            "threshold" => threshold_curve(k),
            "linear" => linear_curve(k),
            other => panic!("unexpected family {other}"),
        };
        max_err = max_err.max((net - expected).abs());
        assert!(
            (net - expected).abs() <= 1e-6,
            "{} at k={k}: net {net}, curve {expected}",
            row[0]
        );
    }

    println!("criterion 2 PASS: both curves within 1e-6 (max err {max_err:.2e}) in {elapsed:?}");
}

/// Criterion 3: the humped environment defeats the monotone-likelihood-ratio
/// condition, yet every general solution—at three fixed accuracy targets and
/// at five sampled coefficients where screening stays profitable—pays on
/// exactly the two middle returns 1/2 (low report) and 3/2 (high report).
#[test]
fn criterion_3_humped_support() {
    let env = humped_env();
    assert!(
        !env.has_monotone_likelihood_ratio(),
        "the humped environment should violate the monotone likelihood ratio"
    );
    assert!(
        env.symmetry_center().is_some(),
        "the humped environment is still mirror-symmetric"
    );

    let expected_cells = vec![(Report::Low, 0.5), (Report::High, 1.5)];
    for target in [0.6, 0.75, 0.9] {
        let problem = ImplementationProblem::new(quad(1.0 / 15.0), target).unwrap();
        let result = min_payment_general(&env, &problem).unwrap();
        assert_eq!(
            positive_cells(&result, &env),
            expected_cells,
            "cells at target {target}"
        );
        assert_eq!(result.family, ContractFamily::General);
        assert!(
            result.family_parameter.is_none(),
            "no threshold form on a non-threshold support"
        );
    }

    // Coefficients where the unconstrained optimum keeps an interior
    // accuracy: cheap enough that screening beats deciding blind, expensive
    // enough that full accuracy is not worth buying.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut sampled = Vec::new();
    for _ in 0..5 {
        let k = rng.gen_range(1.0 / 32.0 + 1e-3..=1.0 / 16.0 - 1e-3);
        let result = optimize_accuracy(
            &env,
            &quad(k),
            Implementor::General,
            &SearchOptions::default(),
        )
        .unwrap();
        assert!(
            result.net_payoff > env.uninformed_value() + 1e-9,
            "screening should be strictly profitable at k={k}"
        );
        assert!(
            result.induced_accuracy < 1.0 - 1e-6,
            "the optimum should be interior at k={k}"
        );
        assert_eq!(
            positive_cells(&result, &env),
            expected_cells,
            "cells at k={k}"
        );
        sampled.push(k);
    }

    println!(
        "criterion 3 PASS: two-cell support at targets 0.6/0.75/0.9 and sampled k {sampled:?}"
    );
}

/// Criterion 4: across 500 seeded environments, every payment-minimizing
/// general contract pays on at most two cells, and handing it to the agent's
/// best-response routine recovers the targeted truthful accuracy to 1e-6.
#[test]
fn criterion_4_sparsity_and_best_response() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0004);
    let instances: Vec<(Environment, f64, f64)> = (0..500)
        .map(|_| {
            let env = random_environment(&mut rng, 2..=6);
            let k = rng.gen_range(0.02..=0.5);
            let target = rng.gen_range(0.55..=0.95);
            (env, k, target)
        })
        .collect();

    let flaws: Vec<String> = instances
        .par_iter()
        .enumerate()
        .filter_map(|(index, (env, k, target))| {
            let cost = quad(*k);
            let problem = match ImplementationProblem::new(cost, *target) {
                Ok(problem) => problem,
                Err(err) => return Some(format!("instance {index}: {err}")),
            };
            let result = match min_payment_general(env, &problem) {
                Ok(result) => result,
                Err(err) => return Some(format!("instance {index}: {err}")),
            };
            let cells = positive_cells(&result, env).len();
            if cells > 2 {
                return Some(format!("instance {index}: {cells} positive cells"));
            }
            let response = best_response(env, &cost, &result.contract);
            if response.strategy != ReportStrategy::Truthful {
                return Some(format!(
                    "instance {index}: agent plays {:?}",
                    response.strategy
                ));
            }
            if (response.accuracy - target).abs() > 1e-6 {
                return Some(format!(
                    "instance {index}: accuracy {} for target {target}",
                    response.accuracy
                ));
            }
            None
        })
        .collect();

    assert!(flaws.is_empty(), "{}", flaws.join("; "));
    println!("criterion 4 PASS: 500 environments, <=2 cells, best response within 1e-6");
}

/// Criterion 5: across 200 seeded mirror-symmetric environments the closed
/// form and the linear program price implementation identically to 1e-8, and
/// the closed form is always classified as a threshold contract.
#[test]
fn criterion_5_symmetric_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0005);
    let instances: Vec<(Environment, f64, f64)> = (0..200)
        .map(|_| {
            let env = random_symmetric_mlrp_environment(&mut rng, 2..=6);
            let k = rng.gen_range(0.02..=0.5);
            let target = rng.gen_range(0.55..=0.95);
            (env, k, target)
        })
        .collect();

    let flaws: Vec<String> = instances
        .par_iter()
        .enumerate()
        .filter_map(|(index, (env, k, target))| {
            let problem = match ImplementationProblem::new(quad(*k), *target) {
                Ok(problem) => problem,
                Err(err) => return Some(format!("instance {index}: {err}")),
            };
            let symmetric = match min_payment_symmetric(env, &problem) {
                Ok(result) => result,
                Err(err) => return Some(format!("instance {index}: {err}")),
            };
            let general = match min_payment_general(env, &problem) {
                Ok(result) => result,
                Err(err) => return Some(format!("instance {index}: {err}")),
            };
            let gap = (symmetric.payment - general.payment).abs();
            if gap > 1e-8 {
                return Some(format!("instance {index}: payment gap {gap}"));
            }
            if symmetric.family != ContractFamily::Threshold || symmetric.family_parameter.is_none()
            {
                return Some(format!(
                    "instance {index}: closed form classified {:?}",
                    symmetric.family
                ));
            }
            None
        })
        .collect();

    assert!(flaws.is_empty(), "{}", flaws.join("; "));
    println!("criterion 5 PASS: 200 symmetric environments, routes agree to 1e-8");
}

/// Criterion 6: across 1000 seeded environments the optimal-to-linear net
/// ratio stays inside [1, 2], and on the crossing preset it equals 132/121.
#[test]
fn criterion_6_gap_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006);
    let instances: Vec<(Environment, f64)> = (0..1000)
        .map(|_| {
            let env = random_environment(&mut rng, 2..=6);
            let k = rng.gen_range(0.02..=0.5);
            (env, k)
        })
        .collect();

    let options = SearchOptions::default();
    let flaws: Vec<String> = instances
        .par_iter()
        .enumerate()
        .filter_map(|(index, (env, k))| {
            let report = match gap_ratio(env, &quad(*k), &options) {
                Ok(report) => report,
                Err(err) => return Some(format!("instance {index}: {err}")),
            };
            if report.ratio < 1.0 - 1e-12 || report.ratio > 2.0 + 1e-9 {
                return Some(format!("instance {index}: ratio {}", report.ratio));
            }
            None
        })
        .collect();
    assert!(flaws.is_empty(), "{}", flaws.join("; "));

    let benchmark = gap_ratio(&crossing_env(), &quad(1.0 / 15.0), &options).unwrap();
    let expected = 132.0 / 121.0;
    assert!(
        (benchmark.ratio - expected).abs() <= 1e-3,
        "crossing-preset ratio {} vs {expected}",
        benchmark.ratio
    );

    println!(
        "criterion 6 PASS: 1000 ratios in [1, 2]; crossing preset at {:.6}",
        benchmark.ratio
    );
}

/// Criterion 7: lifting the optimal contract onto a randomized device
/// preserves every strategy's expected payment to 1e-10 and keeps the
/// truthful net return within epsilon of the unlifted optimum.
#[test]
fn criterion_7_lifted_contracts() {
    let env = crossing_env();
    let problem = ImplementationProblem::new(quad(1.0 / 15.0), 1.0).unwrap();
    let base = min_payment_symmetric(&env, &problem).unwrap().contract;

    for epsilon in [0.1, 0.01] {
        let lifted = base.lift(epsilon).unwrap();
        for j in 0..=10 {
            let gamma = 0.5 + 0.05 * j as f64;
            for strategy in [
                ReportStrategy::Truthful,
                ReportStrategy::Flipped,
                ReportStrategy::AlwaysLow,
                ReportStrategy::AlwaysHigh,
            ] {
                let direct = expected_payment(&env, &base, gamma, strategy);
                let via_lift = lifted.expected_payment(&env, gamma, strategy);
                assert!(
                    (direct - via_lift).abs() <= 1e-10,
                    "payment identity at gamma={gamma}, {strategy:?}, eps={epsilon}"
                );
            }
        }
        let net = lifted.net_return(&env, 1.0, ReportStrategy::Truthful);
        assert!(
            net >= 1.1 - epsilon - 1e-9,
            "lifted net {net} below floor at eps={epsilon}"
        );
    }

    println!("criterion 7 PASS: lift payment identity to 1e-10, net floor holds");
}

/// Criterion 8: the full verification battery — including both grid-oracle
/// cross-checks at their default resolutions — passes in under a minute.
#[test]
fn criterion_8_verification_battery() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("verify.csv");
    let (out, elapsed) = run_binary(&["verify", "--out", csv.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "verify should exit 0; stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(
        elapsed < Duration::from_secs(60),
        "verify took {elapsed:?}, budget is 60s"
    );

    let rows = read_csv(&csv);
    assert_eq!(rows[0], ["check", "passed", "seed", "detail"]);
    for row in &rows[1..] {
        assert_eq!(row[1], "true", "check {} failed: {}", row[0], row[3]);
    }
    for oracle in ["oracle_crossing", "oracle_humped"] {
        assert!(
            rows[1..].iter().any(|row| row[0] == oracle),
            "battery should include {oracle}"
        );
    }

    println!(
        "criterion 8 PASS: {} checks green in {elapsed:?}",
        rows.len() - 1
    );
}
