//! `screener`: optimal delegated-screening contracts from the command line.
//!
//! Three subcommands drive the library end to end:
//!
//! * `solve` — optimal contract per requested family on one environment,
//!   printed as a table and optionally written as CSV;
//! * `sweep` — net payoff per family as the effort-cost coefficient ranges
//!   over a grid, one CSV row per coefficient per family;
//! * `verify` — the invariant battery: preset benchmarks, randomized
//!   structural sweeps, and solver-vs-oracle agreement, one CSV row per
//!   check.
//!
//! Exit codes: 0 success, 2 configuration error, 3 verification failure,
//! 4 numerical failure.

mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use screener::{
    optimal_linear, optimize_accuracy, CostSpec, Environment, Implementor, Report, SearchOptions,
    SolverError,
};

use config::{CliError, Flags, Lane, Plan};
use output::{csv_document, number, render_table, sanitize, write_file};

#[derive(Parser)]
#[command(
    name = "screener",
    version,
    about = "Optimal contracts for delegated investment screening"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one environment and print the optimal contract per family
    Solve(CommonArgs),
    /// Trace net payoff per family as the cost coefficient sweeps a range
    Sweep(CommonArgs),
    /// Run the invariant battery and report one row per check
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment config file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Named preset environment: paper-sec4 or paper-b2
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
    /// Comma-separated contract families: threshold, general, linear
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    family: Vec<String>,
    /// Write machine-readable CSV here in addition to the stdout table
    #[arg(long, value_name = "CSV")]
    out: Option<PathBuf>,
    /// Master seed for randomized checks
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Accuracy grid points used by the optimizing search
    #[arg(long, value_name = "N")]
    grid: Option<usize>,
}

impl CommonArgs {
    fn to_flags(&self) -> Flags {
        Flags {
            config: self.config.clone(),
            preset: self.preset.clone(),
            family: self.family.clone(),
            seed: self.seed,
            grid: self.grid,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also probe three-cell supports in the grid oracle
    #[arg(long)]
    full: bool,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => {
            let plan = Plan::resolve(&args.to_flags())?;
            cmd_solve(&plan, args.out.as_deref())
        }
        Command::Sweep(args) => {
            let plan = Plan::resolve(&args.to_flags())?;
            cmd_sweep(&plan, args.out.as_deref())
        }
        Command::Verify(args) => {
            let plan = Plan::resolve(&args.common.to_flags())?;
            cmd_verify(&plan, args.common.out.as_deref(), args.full)
        }
    }
}

/// One family's solution, flattened for output.
#[derive(Debug)]
struct LaneRow {
    lane: Lane,
    /// Scalar family parameter: the linear share or the threshold bonus.
    parameter: Option<f64>,
    accuracy: f64,
    gross: f64,
    payment: f64,
    net: f64,
    /// Positive cells as (report, return, payment), for the stdout detail.
    cells: Vec<(Report, f64, f64)>,
}

fn solve_lane(
    env: &Environment,
    cost: &CostSpec,
    lane: Lane,
    options: &SearchOptions,
) -> Result<LaneRow, CliError> {
    match lane {
        Lane::Linear => {
            let share =
                optimal_linear(env, cost).map_err(|err| CliError::Numerical(err.to_string()))?;
            Ok(LaneRow {
                lane,
                parameter: Some(share.share),
                accuracy: share.accuracy,
                gross: share.gross_value,
                payment: share.payment,
                net: share.net_payoff,
                cells: Vec::new(),
            })
        }
        Lane::Threshold | Lane::General => {
            let implementor = if lane == Lane::Threshold {
                Implementor::Symmetric
            } else {
                Implementor::General
            };
            let result =
                optimize_accuracy(env, cost, implementor, options).map_err(|err| match err {
                    SolverError::NotSymmetric => CliError::Config(
                        "the threshold family needs a mirror-symmetric environment; \
                         request --family general instead"
                            .into(),
                    ),
                    other => CliError::Numerical(other.to_string()),
                })?;
            let parameter = match lane {
                // The threshold lane always has a bonus; the zero contract's
                // is zero. The general lane reports one only when the linear
                // program happens to land on a threshold shape.
                Lane::Threshold => Some(result.family_parameter.unwrap_or(0.0)),
                _ => result.family_parameter,
            };
            let mut cells = Vec::new();
            for report in Report::ALL {
                for (index, &pay) in result.contract.payments(report).iter().enumerate() {
                    if pay > 1e-9 {
                        cells.push((report, env.support()[index], pay));
                    }
                }
            }
            Ok(LaneRow {
                lane,
                parameter,
                accuracy: result.induced_accuracy,
                gross: result.gross_value,
                payment: result.payment,
                net: result.net_payoff,
                cells,
            })
        }
    }
}

fn describe_environment(label: &str, env: &Environment) -> String {
    let symmetry = if env.symmetry_center().is_some() {
        "mirror-symmetric"
    } else {
        "asymmetric"
    };
    let likelihood = if env.has_monotone_likelihood_ratio() {
        "monotone likelihood ratio"
    } else {
        "non-monotone likelihood ratio"
    };
    format!(
        "environment: {label} ({} returns, prior_high={}, {symmetry}, {likelihood})",
        env.len(),
        number(env.prior_high()),
    )
}

fn describe_cost(cost: &CostSpec) -> String {
    if cost.exponent() == 2.0 {
        format!(
            "cost: quadratic, coefficient={}",
            number(cost.coefficient())
        )
    } else {
        format!(
            "cost: power, coefficient={}, exponent={}",
            number(cost.coefficient()),
            number(cost.exponent()),
        )
    }
}

const SOLVE_HEADER: [&str; 6] = ["family", "alpha_or_bonus", "gamma_star", "V", "T", "net"];

fn solve_fields(row: &LaneRow) -> Vec<String> {
    vec![
        row.lane.label().to_string(),
        row.parameter.map(number).unwrap_or_default(),
        number(row.accuracy),
        number(row.gross),
        number(row.payment),
        number(row.net),
    ]
}

fn cmd_solve(plan: &Plan, out: Option<&std::path::Path>) -> Result<(), CliError> {
    let (label, env) = plan.require_environment()?;
    let rows: Vec<LaneRow> = plan
        .lanes(env)
        .into_iter()
        .map(|lane| solve_lane(env, &plan.cost, lane, &plan.options))
        .collect::<Result<_, _>>()?;

    println!("{}", describe_environment(label, env));
    println!("{}", describe_cost(&plan.cost));
    println!();
    let table: Vec<Vec<String>> = rows.iter().map(solve_fields).collect();
    print!("{}", render_table(&SOLVE_HEADER, &table));
    for row in &rows {
        if row.parameter.is_none() && !row.cells.is_empty() {
            println!();
            println!("{} contract cells:", row.lane.label());
            for (report, value, pay) in &row.cells {
                println!("  ({report}, v={}) -> {}", number(*value), number(*pay));
            }
        }
    }
    if let Some(path) = out {
        write_file(path, &csv_document(&SOLVE_HEADER, &table))?;
    }
    Ok(())
}

/// Rebuilds the configured cost family with a swept coefficient.
fn rebuild_cost(base: &CostSpec, coefficient: f64) -> Result<CostSpec, CliError> {
    let rebuilt = if base.exponent() == 2.0 {
        CostSpec::quadratic(coefficient)
    } else {
        CostSpec::power(coefficient, base.exponent())
    };
    rebuilt
        .map_err(|err| CliError::Config(format!("sweep coefficient {coefficient} rejected: {err}")))
}

const SWEEP_HEADER: [&str; 7] = [
    "family",
    "k",
    "alpha_or_bonus",
    "gamma_star",
    "V",
    "T",
    "net",
];

fn cmd_sweep(plan: &Plan, out: Option<&std::path::Path>) -> Result<(), CliError> {
    let (label, env) = plan.require_environment()?;
    let lanes = plan.lanes(env);
    let coefficients = plan.sweep.values()?;

    // Coefficients fan out to the worker pool; collection preserves input
    // order, so output files are deterministic.
    let per_coefficient: Vec<Vec<(f64, LaneRow)>> = coefficients
        .par_iter()
        .map(|&k| {
            let cost = rebuild_cost(&plan.cost, k)?;
            lanes
                .iter()
                .map(|&lane| solve_lane(env, &cost, lane, &plan.options).map(|row| (k, row)))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let table: Vec<Vec<String>> = per_coefficient
        .iter()
        .flatten()
        .map(|(k, row)| {
            let mut fields = solve_fields(row);
            fields.insert(1, number(*k));
            fields
        })
        .collect();

    println!("{}", describe_environment(label, env));
    println!("{}", describe_cost(&plan.cost));
    println!();
    print!("{}", render_table(&SWEEP_HEADER, &table));
    if let Some(path) = out {
        write_file(path, &csv_document(&SWEEP_HEADER, &table))?;
    }
    Ok(())
}

const VERIFY_HEADER: [&str; 4] = ["check", "passed", "seed", "detail"];

fn cmd_verify(plan: &Plan, out: Option<&std::path::Path>, full: bool) -> Result<(), CliError> {
    let rows = verify::run_battery(plan, full)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|row| {
            vec![
                row.name.to_string(),
                row.passed.to_string(),
                row.seed.map(|seed| seed.to_string()).unwrap_or_default(),
                sanitize(&row.detail),
            ]
        })
        .collect();
    print!("{}", render_table(&VERIFY_HEADER, &table));
    let failed = rows.iter().filter(|row| !row.passed).count();
    println!();
    println!("{} checks, {failed} failed", rows.len());
    if let Some(path) = out {
        write_file(path, &csv_document(&VERIFY_HEADER, &table))?;
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
