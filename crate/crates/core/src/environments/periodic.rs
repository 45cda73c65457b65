use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Dynamics, GraphonSpec, ModelSpec, PopulationGrid, StepContext};

use super::{aggregate_cap, check_weights, log_crowd, positive, ring_transition, unit_interval};

/// The torus `[0, 1)` discretised into `states` cells at `x_s = s / S`.
///
/// Cost `w_x·(1 + sin 2πx_s)/2 + w_a·|a - 1| + w_c·ln(1 + k z(s))/ln(1 + k z_max)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeriodicAversionParams {
    pub states: usize,
    pub horizon: usize,
    pub blocks: usize,
    pub noise: f64,
    pub position_weight: f64,
    pub action_weight: f64,
    pub crowd_weight: f64,
    pub crowd_scale: f64,
}

impl Default for PeriodicAversionParams {
    fn default() -> Self {
        Self {
            states: 21,
            horizon: 10,
            blocks: 1,
            noise: 0.1,
            position_weight: 0.4,
            action_weight: 0.2,
            crowd_weight: 0.4,
            crowd_scale: 10.0,
        }
    }
}

struct PeriodicAversion {
    params: PeriodicAversionParams,
    cap: f64,
}

impl Dynamics for PeriodicAversion {
    fn cost(&self, ctx: &StepContext<'_>, state: usize, action: usize) -> f64 {
        let p = &self.params;
        let x = state as f64 / p.states as f64;
        let position = ((1.0 + (2.0 * PI * x).sin()) / 2.0).clamp(0.0, 1.0);
        p.position_weight * position
            + p.action_weight * action.abs_diff(1) as f64
            + p.crowd_weight * log_crowd(ctx.aggregate[state], self.cap, p.crowd_scale)
    }

    fn transition(&self, _ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) {
        ring_transition(self.params.states, state, action, self.params.noise, out);
    }
}

impl PeriodicAversionParams {
    pub(crate) fn build(&self) -> Result<ModelSpec> {
        positive("states", self.states)?;
        positive("horizon", self.horizon)?;
        positive("blocks", self.blocks)?;
        unit_interval("noise", self.noise)?;
        check_weights("periodic aversion", &[self.position_weight, self.action_weight, self.crowd_weight])?;
        let grid = PopulationGrid::uniform(self.blocks)?;
        let graphon = GraphonSpec::complete(self.blocks)?;
        let cap = aggregate_cap(&graphon, &grid);
        let initial = vec![vec![1.0 / self.states as f64; self.states]; self.blocks];
        ModelSpec::new(self.horizon, self.states, 3, grid, graphon, initial, Arc::new(PeriodicAversion { params: self.clone(), cap }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let m = PeriodicAversionParams::default().build().unwrap();
        assert_eq!((m.states(), m.actions(), m.blocks()), (21, 3, 1));
    }

    #[test]
    fn full_crowd_and_worst_position_stay_within_one() {
        let m = PeriodicAversionParams::default().build().unwrap();
        let z = vec![1.0; 21];
        let ctx = StepContext { block: 0, step: 0, aggregate: &z, components: &z };
        for s in 0..21 {
            for a in 0..3 {
                let c = m.cost(&ctx, s, a);
                assert!((0.0..=1.0).contains(&c));
            }
        }
    }
}
