use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::{FeatureMap, LinearModelSpec, OneHotFeatures};
use crate::model::{Dynamics, GraphonSpec, ModelSpec, PopulationGrid, StepContext};

use super::{aggregate_cap, positive};

/// Random game whose transitions are exactly `P_h(·|s, a, z) = θ*_h φ(s, a, z)`.
///
/// Features are points of the simplex `Δ(d)`, mixed between two random
/// tables by a weight linear in the aggregate, and every column of `θ*_h`
/// is a distribution over states. Hence `θ*_h φ` is always a distribution
/// and `‖φ‖₂ ≤ ‖φ‖₁ = 1`. In one-hot mode `d = S·A` and `θ*_h` is a
/// tabular transition table.
///
/// Costs are `(c⁰_h(s, a) + z(s)/z_max) / 2` with random `c⁰ ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearSyntheticParams {
    pub states: usize,
    pub actions: usize,
    pub horizon: usize,
    /// Ignored in one-hot mode, where `d = S·A`.
    pub dim: usize,
    pub seed: u64,
    pub one_hot: bool,
}

impl Default for LinearSyntheticParams {
    fn default() -> Self {
        Self { states: 4, actions: 2, horizon: 3, dim: 4, seed: 0, one_hot: false }
    }
}

/// `φ(s, a, z) = (1 - w)·φ⁰(s, a) + w·φ¹(s, a)` with `w = ⟨κ, z⟩ ∈ [0, 1]`.
#[derive(Debug, Clone)]
pub struct MixtureFeatures {
    dim: usize,
    actions: usize,
    base: Vec<f64>,
    shifted: Vec<f64>,
    kappa: Vec<f64>,
}

impl FeatureMap for MixtureFeatures {
    fn dim(&self) -> usize {
        self.dim
    }

    fn features(&self, state: usize, action: usize, aggregate: &[f64], out: &mut [f64]) {
        let w = self.kappa.iter().zip(aggregate).map(|(k, z)| k * z).sum::<f64>().clamp(0.0, 1.0);
        let o = (state * self.actions + action) * self.dim;
        for (j, x) in out.iter_mut().enumerate() {
            *x = (1.0 - w) * self.base[o + j] + w * self.shifted[o + j];
        }
    }
}

struct LinearSynthetic {
    features: Arc<dyn FeatureMap>,
    thetas: Vec<DMatrix<f64>>,
    costs: Vec<f64>,
    states: usize,
    actions: usize,
    cap: f64,
}

impl Dynamics for LinearSynthetic {
    fn cost(&self, ctx: &StepContext<'_>, state: usize, action: usize) -> f64 {
        let base = self.costs[(ctx.step * self.states + state) * self.actions + action];
        0.5 * base + 0.5 * (ctx.aggregate[state] / self.cap).min(1.0)
    }

    fn transition(&self, ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) {
        let mut phi = vec![0.0; self.features.dim()];
        self.features.features(state, action, ctx.aggregate, &mut phi);
        let theta = &self.thetas[ctx.step];
        for (s_next, o) in out.iter_mut().enumerate() {
            *o = theta.row(s_next).iter().zip(&phi).map(|(t, f)| t * f).sum();
        }
    }
}

/// Flat Dirichlet(1) draw.
fn simplex_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let mut x: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    x
}

pub fn make_linear_synthetic(params: &LinearSyntheticParams) -> Result<(ModelSpec, LinearModelSpec)> {
    let p = params;
    positive("states", p.states)?;
    positive("actions", p.actions)?;
    positive("horizon", p.horizon)?;
    let dim = if p.one_hot { p.states * p.actions } else { p.dim };
    positive("feature dimension", dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let grid = PopulationGrid::uniform(1)?;
    let graphon = GraphonSpec::complete(1)?;
    let cap = aggregate_cap(&graphon, &grid);

    let features: Arc<dyn FeatureMap> = if p.one_hot {
        Arc::new(OneHotFeatures { states: p.states, actions: p.actions })
    } else {
        let pairs = p.states * p.actions;
        let base = (0..pairs).flat_map(|_| simplex_point(dim, &mut rng)).collect();
        let shifted = (0..pairs).flat_map(|_| simplex_point(dim, &mut rng)).collect();
        let kappa = (0..p.states).map(|_| rng.random::<f64>() / cap).collect();
        Arc::new(MixtureFeatures { dim, actions: p.actions, base, shifted, kappa })
    };
    let thetas: Vec<DMatrix<f64>> = (0..p.horizon)
        .map(|_| {
            let mut theta = DMatrix::zeros(p.states, dim);
            for j in 0..dim {
                theta.set_column(j, &nalgebra::DVector::from_vec(simplex_point(p.states, &mut rng)));
            }
            theta
        })
        .collect();
    let costs = (0..p.horizon * p.states * p.actions).map(|_| rng.random::<f64>()).collect();

    let dynamics = LinearSynthetic { features: features.clone(), thetas: thetas.clone(), costs, states: p.states, actions: p.actions, cap };
    let mut initial = vec![0.0; p.states];
    initial[0] = 1.0;
    let model = ModelSpec::new(p.horizon, p.states, p.actions, grid, graphon, vec![initial], Arc::new(dynamics))?;
    let linear = LinearModelSpec::new(features, Some(thetas))?;
    Ok((model, linear))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_mode_reproduces_the_table() {
        let params = LinearSyntheticParams { states: 3, actions: 2, horizon: 2, dim: 0, seed: 4, one_hot: true };
        let (model, linear) = make_linear_synthetic(&params).unwrap();
        assert_eq!(linear.dim(), 6);
        let z = [0.2, 0.3, 0.5];
        let ctx = StepContext { block: 0, step: 1, aggregate: &z, components: &z };
        let mut row = vec![0.0; 3];
        model.transition(&ctx, 2, 1, &mut row);
        let theta = &linear.truth().unwrap()[1];
        for s in 0..3 {
            assert_eq!(row[s], theta[(s, 2 * 2 + 1)]);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let p = LinearSyntheticParams::default();
        let (_, a) = make_linear_synthetic(&p).unwrap();
        let (_, b) = make_linear_synthetic(&p).unwrap();
        assert_eq!(a.truth(), b.truth());
    }
}
