//! Named experiment configurations.
//!
//! The `paper-*` presets use constant `η = γ = 0.1` and five seeds. Their
//! regularization `λ = 0.4` keeps the bandit runs out of the regime where
//! the bias of the implicit-exploration estimator dominates.

use gmfg_core::environments::*;
use gmfg_core::ScheduleRule;

use crate::config::{ExperimentConfig, SolverKind, SCHEMA_VERSION};

const PAPER_LAMBDA: f64 = 0.4;
const PAPER_RATE: f64 = 0.1;
const PAPER_ITERATIONS: u64 = 2000;

fn base(name: &str, environment: EnvironmentParams, solver: SolverKind) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: Some(name.to_string()),
        environment,
        solver,
        lambda: PAPER_LAMBDA,
        iterations: PAPER_ITERATIONS,
        record_every: 10,
        episodes_per_iteration: 1,
        learning_rate: None,
        exploration: None,
        value_step: None,
        seeds: (0..5).collect(),
        output_dir: None,
        reference: None,
        record_wall_time: false,
    }
}

fn paper(name: &str, environment: EnvironmentParams, solver: SolverKind) -> ExperimentConfig {
    let mut c = base(name, environment, solver);
    match solver {
        SolverKind::FictitiousPlay => c.lambda = 0.0,
        _ => {
            c.learning_rate = Some(ScheduleRule::Constant { c: PAPER_RATE });
            c.exploration = Some(ScheduleRule::Constant { c: PAPER_RATE });
        }
    }
    c
}

fn paper_environments() -> [(&'static str, EnvironmentParams); 4] {
    [
        ("beach-bar", EnvironmentParams::BeachBar(BeachBarParams::default())),
        ("crowd-avoidance", EnvironmentParams::CrowdAvoidance(CrowdAvoidanceParams::grid())),
        ("predator-prey", EnvironmentParams::PredatorPrey(PredatorPreyParams::default())),
        ("periodic-aversion", EnvironmentParams::PeriodicAversion(PeriodicAversionParams::default())),
    ]
}

/// Every shipped preset, in listing order.
pub fn all() -> Vec<ExperimentConfig> {
    let mut out = Vec::new();
    let mut smoke = base("smoke", EnvironmentParams::BeachBar(BeachBarParams::default()), SolverKind::FullInfo);
    smoke.lambda = 0.1;
    smoke.iterations = 10;
    smoke.record_every = 1;
    smoke.seeds = vec![1];
    out.push(smoke);

    for (env_name, env) in paper_environments() {
        out.push(paper(&format!("paper-{env_name}"), env.clone(), SolverKind::Bandit));
        out.push(paper(&format!("paper-{env_name}-linear"), env.clone(), SolverKind::Linear));
        out.push(paper(&format!("paper-{env_name}-fp"), env, SolverKind::FictitiousPlay));
    }

    let congestion = EnvironmentParams::Congestion(CongestionParams::default());
    let mut theorem = base("theorem1-congestion", congestion.clone(), SolverKind::FullInfo);
    theorem.lambda = 0.5;
    theorem.iterations = 1000;
    theorem.record_every = 1;
    theorem.seeds = vec![0];
    out.push(theorem);

    let mut reference = base("theorem1-congestion-reference", congestion, SolverKind::FullInfo);
    reference.lambda = 0.5;
    reference.iterations = 100_000;
    reference.record_every = 100_000;
    reference.seeds = vec![0];
    out.push(reference);

    let synthetic = EnvironmentParams::LinearSynthetic(LinearSyntheticParams::default());
    let mut linear = base("linear-synthetic", synthetic, SolverKind::Linear);
    linear.lambda = 0.1;
    linear.learning_rate = Some(ScheduleRule::Power { c: 1.0, p: 0.8 });
    linear.exploration = Some(ScheduleRule::Power { c: 1.0, p: 0.2 });
    out.push(linear);
    out
}

pub fn names() -> Vec<String> {
    all().into_iter().filter_map(|c| c.name).collect()
}

pub fn get(name: &str) -> Option<ExperimentConfig> {
    all().into_iter().find(|c| c.name.as_deref() == Some(name))
}
