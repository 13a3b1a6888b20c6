//! Experiment configuration: the JSON schema, the named preset environments,
//! and the merge of config-file values with command-line flags into a
//! resolved plan.
//!
//! Config files are strict: the schema is versioned, unknown keys are
//! rejected, and every embedded environment or cost passes the library's own
//! validation during deserialization. Command-line flags override the file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use screener::{CostSpec, Environment, SearchOptions};
use serde::Deserialize;

/// The config format this binary understands.
pub const SCHEMA_VERSION: u32 = 1;

/// Default cost coefficient when the config names none.
pub const DEFAULT_COST_COEFFICIENT: f64 = 1.0 / 15.0;

/// Errors carrying the binary's documented exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unusable configuration, flags, or file paths (exit code 2).
    Config(String),
    /// Verification ran to completion and some checks failed (exit code 3).
    ChecksFailed(usize),
    /// A solver or oracle computation failed (exit code 4).
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::ChecksFailed(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "{msg}"),
            CliError::ChecksFailed(n) => write!(f, "{n} verification check(s) failed"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Contract families the commands can be asked to optimize over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lane {
    /// Confirmation-bonus contracts via the closed-form symmetric solver.
    Threshold,
    /// Arbitrary contracts via the linear program.
    General,
    /// Equity-share benchmark contracts.
    Linear,
}

impl Lane {
    pub fn label(self) -> &'static str {
        match self {
            Lane::Threshold => "threshold",
            Lane::General => "general",
            Lane::Linear => "linear",
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        match text.trim() {
            "threshold" => Ok(Lane::Threshold),
            "general" => Ok(Lane::General),
            "linear" => Ok(Lane::Linear),
            other => Err(CliError::Config(format!(
                "unknown family '{other}'; expected threshold, general, or linear"
            ))),
        }
    }
}

/// An inclusive range of cost coefficients for `sweep`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for SweepRange {
    fn default() -> Self {
        SweepRange {
            start: 0.01,
            stop: 0.24,
            step: 0.01,
        }
    }
}

impl SweepRange {
    /// Materializes the coefficients, rejecting empty or malformed ranges.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if !self.start.is_finite()
            || !self.stop.is_finite()
            || !self.step.is_finite()
            || self.step <= 0.0
        {
            return Err(CliError::Config(format!(
                "sweep range must have finite bounds and a positive step, got start={} stop={} step={}",
                self.start, self.stop, self.step
            )));
        }
        if self.start < 0.0 {
            return Err(CliError::Config(format!(
                "sweep start must be non-negative, got {}",
                self.start
            )));
        }
        // Slack keeps the intended endpoint when `stop - start` is a whole
        // number of steps mathematically but falls a few ulps short in floats.
        let count = ((self.stop - self.start) / self.step + 1e-9).floor();
        if count < 0.0 {
            return Err(CliError::Config(format!(
                "sweep range is empty: start={} exceeds stop={}",
                self.start, self.stop
            )));
        }
        let count = count as usize + 1;
        if count > 100_000 {
            return Err(CliError::Config(format!(
                "sweep range has {count} points; cap is 100000"
            )));
        }
        Ok((0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect())
    }
}

/// Instance counts for the randomized verification sweeps.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counts {
    #[serde(default = "Counts::default_sparsity")]
    pub sparsity: usize,
    #[serde(default = "Counts::default_equivalence")]
    pub equivalence: usize,
    #[serde(default = "Counts::default_gap")]
    pub gap: usize,
}

impl Counts {
    fn default_sparsity() -> usize {
        500
    }
    fn default_equivalence() -> usize {
        200
    }
    fn default_gap() -> usize {
        1000
    }
}

impl Default for Counts {
    fn default() -> Self {
        Counts {
            sparsity: Self::default_sparsity(),
            equivalence: Self::default_equivalence(),
            gap: Self::default_gap(),
        }
    }
}

/// The JSON config file, exactly as written by the user.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must equal [`SCHEMA_VERSION`].
    pub schema_version: u32,
    /// Named environment; mutually exclusive with `environment`.
    #[serde(default)]
    pub preset: Option<String>,
    /// Inline environment; mutually exclusive with `preset`.
    #[serde(default)]
    pub environment: Option<Environment>,
    /// Effort-cost specification; defaults to quadratic with k = 1/15.
    #[serde(default)]
    pub cost: Option<CostSpec>,
    /// Families to solve; defaults depend on the environment's symmetry.
    #[serde(default)]
    pub families: Option<Vec<String>>,
    /// Coefficient range for `sweep`; defaults to 0.01..=0.24 step 0.01.
    #[serde(default)]
    pub sweep: Option<SweepRange>,
    /// Lottery weight for the lift checks in `verify`.
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// Master seed for randomized checks.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Instance counts for randomized checks.
    #[serde(default)]
    pub counts: Option<Counts>,
    /// Accuracy grid points for the optimizing search.
    #[serde(default)]
    pub grid: Option<usize>,
}

impl ExperimentConfig {
    fn empty() -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            preset: None,
            environment: None,
            cost: None,
            families: None,
            sweep: None,
            epsilon: None,
            seed: None,
            counts: None,
            grid: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|err| {
            CliError::Config(format!("cannot read config {}: {err}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|err| {
            CliError::Config(format!("config parse error in {}: {err}", path.display()))
        })
    }
}

/// Builds one of the named preset environments.
pub fn preset_environment(name: &str) -> Result<Environment, CliError> {
    let built = match name {
        "paper-sec4" => Environment::new(
            0.5,
            vec![0.0, 1.0, 2.0],
            vec![0.6, 0.2, 0.2],
            vec![0.2, 0.2, 0.6],
        ),
        "paper-b2" => Environment::new(
            0.5,
            vec![0.0, 0.5, 1.0, 1.5, 2.0],
            vec![0.125, 0.375, 0.25, 0.125, 0.125],
            vec![0.125, 0.125, 0.25, 0.375, 0.125],
        ),
        other => {
            return Err(CliError::Config(format!(
                "unknown preset '{other}'; available presets: paper-sec4, paper-b2"
            )))
        }
    };
    built.map_err(|err| CliError::Config(format!("preset '{name}' failed validation: {err}")))
}

/// Command-line flags shared by the subcommands, as captured by the parser.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub config: Option<PathBuf>,
    pub preset: Option<String>,
    pub family: Vec<String>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
}

/// A fully resolved run: config file merged with flag overrides.
#[derive(Debug, Clone)]
pub struct Plan {
    /// Environment plus the label it was requested under, when one was
    /// requested at all (`verify` runs a fixed battery and needs none).
    pub environment: Option<(String, Environment)>,
    pub cost: CostSpec,
    /// Explicitly requested families; `None` means pick by environment.
    pub families: Option<Vec<Lane>>,
    pub sweep: SweepRange,
    pub epsilon: f64,
    pub seed: u64,
    pub counts: Counts,
    pub options: SearchOptions,
}

impl Plan {
    pub fn resolve(flags: &Flags) -> Result<Self, CliError> {
        let config = match &flags.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::empty(),
        };
        if config.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema_version {}; this binary understands {SCHEMA_VERSION}",
                config.schema_version
            )));
        }
        if config.preset.is_some() && config.environment.is_some() {
            return Err(CliError::Config(
                "config sets both 'preset' and 'environment'; choose one".into(),
            ));
        }

        let environment = if let Some(name) = &flags.preset {
            Some((name.clone(), preset_environment(name)?))
        } else if let Some(name) = &config.preset {
            Some((name.clone(), preset_environment(name)?))
        } else {
            config
                .environment
                .clone()
                .map(|env| ("inline".to_string(), env))
        };

        let cost = match config.cost {
            Some(cost) => cost,
            None => {
                CostSpec::quadratic(DEFAULT_COST_COEFFICIENT).expect("default coefficient is valid")
            }
        };

        let family_names: Option<&[String]> = if !flags.family.is_empty() {
            Some(&flags.family)
        } else {
            config.families.as_deref()
        };
        let families = match family_names {
            Some(names) => {
                if names.is_empty() {
                    return Err(CliError::Config("family list is empty".into()));
                }
                Some(
                    names
                        .iter()
                        .map(|name| Lane::parse(name))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
            None => None,
        };

        let epsilon = config.epsilon.unwrap_or(0.01);
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(CliError::Config(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }

        let mut options = SearchOptions::default();
        if let Some(points) = flags.grid.or(config.grid) {
            if !(2..=2_000_001).contains(&points) {
                return Err(CliError::Config(format!(
                    "grid must have between 2 and 2000001 points, got {points}"
                )));
            }
            options.accuracy_grid_points = points;
        }

        Ok(Plan {
            environment,
            cost,
            families,
            sweep: config.sweep.unwrap_or_default(),
            epsilon,
            seed: flags.seed.or(config.seed).unwrap_or(42),
            counts: config.counts.unwrap_or_default(),
            options,
        })
    }

    /// The environment, or a config error for commands that need one.
    pub fn require_environment(&self) -> Result<(&str, &Environment), CliError> {
        self.environment
            .as_ref()
            .map(|(label, env)| (label.as_str(), env))
            .ok_or_else(|| {
                CliError::Config(
                    "no environment selected; pass --preset or a config with 'environment'".into(),
                )
            })
    }

    /// Requested families, or the environment-driven default: the symmetric
    /// closed form when it applies, otherwise the general program — each
    /// compared against the linear benchmark.
    pub fn lanes(&self, env: &Environment) -> Vec<Lane> {
        if let Some(explicit) = &self.families {
            return explicit.clone();
        }
        let primary = if env.symmetry_center().is_some() && env.has_monotone_likelihood_ratio() {
            Lane::Threshold
        } else {
            Lane::General
        };
        vec![primary, Lane::Linear]
    }
}
