use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use gmfg_core::environments::EnvironmentParams;
use gmfg_core::solvers::SolverConfig;
use gmfg_core::{ScheduleRule, Schedules};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    FullInfo,
    Bandit,
    Linear,
    FictitiousPlay,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::FullInfo => "full_info",
            SolverKind::Bandit => "bandit",
            SolverKind::Linear => "linear",
            SolverKind::FictitiousPlay => "fictitious_play",
        }
    }
}

/// One experiment: an environment, a solver and the seeds to run it with.
///
/// Schedules are optional because their defaults depend on the solver:
/// full information falls back to `η_t = 1/(λt)`, the sampled solvers
/// require an explicit learning rate and exploration, and fictitious play
/// ignores them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub environment: EnvironmentParams,
    pub solver: SolverKind,
    pub lambda: f64,
    pub iterations: u64,
    #[serde(default = "one")]
    pub record_every: u64,
    #[serde(default = "one_usize")]
    pub episodes_per_iteration: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<ScheduleRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exploration: Option<ScheduleRule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value_step: Option<ScheduleRule>,
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Reference artifact written by `gmfg reference`; enables `kl_to_reference`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
    #[serde(default)]
    pub record_wall_time: bool,
}

fn one() -> u64 {
    1
}

fn one_usize() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).context("malformed experiment config")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Directory name for this experiment's artifacts.
    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| format!("{}-{}", self.environment.name(), self.solver.name()))
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {} (this build reads {SCHEMA_VERSION})",
            self.schema_version
        );
        ensure!(!self.seeds.is_empty(), "seed list is empty");
        if let Some(name) = &self.name {
            ensure!(
                !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)),
                "experiment name {name:?} must be nonempty and use only letters, digits, '-', '_' or '.'"
            );
        }
        ensure!(self.lambda.is_finite() && self.lambda >= 0.0, "lambda must be nonnegative and finite");
        if self.solver == SolverKind::FictitiousPlay && self.lambda != 0.0 {
            bail!("fictitious_play uses unregularized best responses; set lambda to 0");
        }
        ensure!(self.iterations > 0, "iterations must be at least 1");
        ensure!(self.record_every > 0, "record_every must be at least 1");
        ensure!(self.episodes_per_iteration > 0, "episodes_per_iteration must be at least 1");
        self.schedules()?.validate()?;
        Ok(())
    }

    /// Schedules with solver-specific defaults filled in.
    pub fn schedules(&self) -> Result<Schedules> {
        let value_step = self.value_step.unwrap_or(ScheduleRule::HorizonHarmonic);
        match self.solver {
            SolverKind::FullInfo => {
                let learning_rate = match self.learning_rate {
                    Some(rule) => rule,
                    None if self.lambda > 0.0 => ScheduleRule::Power { c: 1.0 / self.lambda, p: 1.0 },
                    None => bail!("full_info with lambda = 0 needs an explicit learning_rate"),
                };
                Ok(Schedules { learning_rate, exploration: ScheduleRule::Constant { c: 0.0 }, value_step })
            }
            SolverKind::Bandit | SolverKind::Linear => {
                let name = self.solver.name();
                let learning_rate = self.learning_rate.with_context(|| format!("{name} needs a learning_rate schedule"))?;
                let exploration = self.exploration.with_context(|| format!("{name} needs an exploration schedule"))?;
                if let ScheduleRule::Constant { c } | ScheduleRule::Power { c, .. } = exploration {
                    ensure!(c > 0.0, "{name} needs positive exploration");
                }
                Ok(Schedules { learning_rate, exploration, value_step })
            }
            SolverKind::FictitiousPlay => Ok(Schedules::constant(1.0, 0.0)),
        }
    }

    /// Core solver settings for one seed, without a reference.
    pub fn solver_config(&self, seed: u64) -> Result<SolverConfig> {
        let mut config = SolverConfig::new(self.lambda, self.schedules()?, self.iterations)
            .with_seed(seed)
            .with_record_every(self.record_every);
        config.episodes_per_iteration = self.episodes_per_iteration;
        config.record_wall_time = self.record_wall_time;
        Ok(config)
    }
}
