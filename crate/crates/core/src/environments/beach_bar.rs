use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GmfgError, Result};
use crate::model::{Dynamics, GraphonSpec, ModelSpec, PopulationGrid, StepContext};

use super::{aggregate_cap, check_weights, log_crowd, positive, ring_transition, unit_interval};

/// Crowd modelling on a ring: agents want to sit near the bar but avoid
/// crowded cells. Actions move one cell left, stay, or one cell right.
///
/// Cost `w_d·dist(s, bar)/max_dist + w_m·|a - 1| + w_c·ln(1 + k z(s))/ln(1 + k z_max)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BeachBarParams {
    pub states: usize,
    pub horizon: usize,
    pub blocks: usize,
    pub bar: usize,
    pub noise: f64,
    pub distance_weight: f64,
    pub move_weight: f64,
    pub crowd_weight: f64,
    pub crowd_scale: f64,
}

impl Default for BeachBarParams {
    fn default() -> Self {
        Self {
            states: 10,
            horizon: 10,
            blocks: 1,
            bar: 5,
            noise: 0.1,
            distance_weight: 0.7,
            move_weight: 0.02,
            crowd_weight: 0.28,
            crowd_scale: 10.0,
        }
    }
}

struct BeachBar {
    params: BeachBarParams,
    cap: f64,
}

impl BeachBar {
    fn distance(&self, s: usize) -> f64 {
        let n = self.params.states;
        let d = s.abs_diff(self.params.bar);
        d.min(n - d) as f64
    }
}

impl Dynamics for BeachBar {
    fn cost(&self, ctx: &StepContext<'_>, state: usize, action: usize) -> f64 {
        let p = &self.params;
        let max_dist = (p.states / 2).max(1) as f64;
        p.distance_weight * self.distance(state) / max_dist
            + p.move_weight * action.abs_diff(1) as f64
            + p.crowd_weight * log_crowd(ctx.aggregate[state], self.cap, p.crowd_scale)
    }

    fn transition(&self, _ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) {
        ring_transition(self.params.states, state, action, self.params.noise, out);
    }
}

impl BeachBarParams {
    pub(crate) fn build(&self) -> Result<ModelSpec> {
        positive("states", self.states)?;
        positive("horizon", self.horizon)?;
        positive("blocks", self.blocks)?;
        unit_interval("noise", self.noise)?;
        check_weights("beach bar", &[self.distance_weight, self.move_weight, self.crowd_weight])?;
        if self.bar >= self.states {
            return Err(GmfgError::InvalidParams(format!("bar location {} outside {} states", self.bar, self.states)));
        }
        if !(self.crowd_scale > 0.0 && self.crowd_scale.is_finite()) {
            return Err(GmfgError::InvalidParams("crowd scale must be positive".into()));
        }
        let grid = PopulationGrid::uniform(self.blocks)?;
        let graphon = GraphonSpec::complete(self.blocks)?;
        let cap = aggregate_cap(&graphon, &grid);
        let initial = vec![vec![1.0 / self.states as f64; self.states]; self.blocks];
        ModelSpec::new(self.horizon, self.states, 3, grid, graphon, initial, Arc::new(BeachBar { params: self.clone(), cap }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environments::{make_environment, EnvironmentParams};

    #[test]
    fn defaults_match_the_benchmark_dimensions() {
        let m = make_environment(&EnvironmentParams::BeachBar(BeachBarParams::default())).unwrap();
        assert_eq!((m.states(), m.actions(), m.blocks()), (10, 3, 1));
    }

    #[test]
    fn bar_is_cheapest_without_crowd() {
        let m = BeachBarParams::default().build().unwrap();
        let z = vec![0.0; 10];
        let ctx = StepContext { block: 0, step: 0, aggregate: &z, components: &z };
        let costs: Vec<f64> = (0..10).map(|s| m.cost(&ctx, s, 1)).collect();
        let best = costs.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert_eq!(best, 5);
        assert_eq!(costs[5], 0.0);
    }

    #[test]
    fn rejects_bar_outside_the_ring() {
        let p = BeachBarParams { bar: 10, ..Default::default() };
        assert!(p.build().is_err());
    }
}
