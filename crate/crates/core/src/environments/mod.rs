//! Benchmark games. Every constructor returns a validated [`ModelSpec`]
//! whose costs lie in `[0, 1]` for every admissible aggregate.

mod beach_bar;
mod congestion;
mod crowd;
mod linear_synthetic;
mod periodic;
mod predator_prey;

use serde::{Deserialize, Serialize};

use crate::error::{GmfgError, Result};
use crate::estimators::LinearModelSpec;
use crate::model::{GraphonSpec, ModelSpec, PopulationGrid};

pub use beach_bar::BeachBarParams;
pub use congestion::CongestionParams;
pub use crowd::CrowdAvoidanceParams;
pub use linear_synthetic::{make_linear_synthetic, LinearSyntheticParams};
pub use periodic::PeriodicAversionParams;
pub use predator_prey::PredatorPreyParams;

/// Environment name plus its parameters; missing fields take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum EnvironmentParams {
    BeachBar(BeachBarParams),
    CrowdAvoidance(CrowdAvoidanceParams),
    PredatorPrey(PredatorPreyParams),
    PeriodicAversion(PeriodicAversionParams),
    Congestion(CongestionParams),
    AntiCongestion(CongestionParams),
    LinearSynthetic(LinearSyntheticParams),
}

impl EnvironmentParams {
    pub fn name(&self) -> &'static str {
        match self {
            EnvironmentParams::BeachBar(_) => "beach_bar",
            EnvironmentParams::CrowdAvoidance(_) => "crowd_avoidance",
            EnvironmentParams::PredatorPrey(_) => "predator_prey",
            EnvironmentParams::PeriodicAversion(_) => "periodic_aversion",
            EnvironmentParams::Congestion(_) => "congestion",
            EnvironmentParams::AntiCongestion(_) => "anti_congestion",
            EnvironmentParams::LinearSynthetic(_) => "linear_synthetic",
        }
    }
}

pub fn make_environment(params: &EnvironmentParams) -> Result<ModelSpec> {
    match params {
        EnvironmentParams::BeachBar(p) => p.build(),
        EnvironmentParams::CrowdAvoidance(p) => p.build(),
        EnvironmentParams::PredatorPrey(p) => p.build(),
        EnvironmentParams::PeriodicAversion(p) => p.build(),
        EnvironmentParams::Congestion(p) => p.build(false),
        EnvironmentParams::AntiCongestion(p) => p.build(true),
        EnvironmentParams::LinearSynthetic(p) => Ok(make_linear_synthetic(p)?.0),
    }
}

/// Linear structure for the linear solver: the synthetic game's own
/// features, otherwise tabular one-hot features.
pub fn linear_spec_for(params: &EnvironmentParams, model: &ModelSpec) -> Result<LinearModelSpec> {
    match params {
        EnvironmentParams::LinearSynthetic(p) => Ok(make_linear_synthetic(p)?.1),
        _ => Ok(LinearModelSpec::one_hot(model.states(), model.actions())),
    }
}

pub(crate) fn positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(GmfgError::InvalidParams(format!("{name} must be positive")));
    }
    Ok(())
}

pub(crate) fn unit_interval(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(GmfgError::InvalidParams(format!("{name} = {value} must lie in [0, 1]")));
    }
    Ok(())
}

/// Largest value any aggregate entry can take: `max_{h,b} Σ_{b'} W_h[b,b'] ν_{b'}`.
pub(crate) fn aggregate_cap(graphon: &GraphonSpec, grid: &PopulationGrid) -> f64 {
    let blocks = grid.blocks();
    (0..graphon.step_count())
        .flat_map(|h| (0..blocks).map(move |b| (h, b)))
        .map(|(h, b)| (0..blocks).map(|src| graphon.weight(h, b, src) * grid.weight(src)).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Ring move with displacement `action - 1`; with probability `noise` the
/// displacement is instead uniform over `{-1, 0, +1}`.
pub(crate) fn ring_transition(states: usize, state: usize, action: usize, noise: f64, out: &mut [f64]) {
    out.fill(0.0);
    let step = |d: isize| ((state as isize + d).rem_euclid(states as isize)) as usize;
    out[step(action as isize - 1)] += 1.0 - noise;
    for d in -1..=1 {
        out[step(d)] += noise / 3.0;
    }
}

/// `ln(1 + k z) / ln(1 + k cap)`: concave crowd aversion mapped into `[0, 1]`.
pub(crate) fn log_crowd(z: f64, cap: f64, k: f64) -> f64 {
    if cap <= 0.0 {
        return 0.0;
    }
    ((1.0 + k * z.max(0.0)).ln() / (1.0 + k * cap).ln()).min(1.0)
}

/// Weighted terms with weights summing to one, so the result stays in `[0, 1]`.
pub(crate) fn check_weights(name: &str, weights: &[f64]) -> Result<()> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(GmfgError::InvalidParams(format!("{name} cost weights must be nonnegative and sum to one")));
    }
    Ok(())
}
