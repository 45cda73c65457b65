use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GmfgError, Result};
use crate::model::{Dynamics, GraphonSpec, ModelSpec, PopulationGrid, StepContext};

use super::{positive, ring_transition, unit_interval};

/// Synthetic congestion game on a ring with cost `z(s)/W_max`, which is
/// weakly monotone. The anti-congestion variant pays `1 - z(s)/W_max`
/// instead and is not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CongestionParams {
    pub states: usize,
    pub actions: usize,
    pub horizon: usize,
    pub blocks: usize,
    pub noise: f64,
    /// Start cell for every block.
    pub start: usize,
}

impl Default for CongestionParams {
    fn default() -> Self {
        Self { states: 5, actions: 3, horizon: 5, blocks: 1, noise: 0.0, start: 0 }
    }
}

struct Congestion {
    states: usize,
    noise: f64,
    max_weight: f64,
    inverted: bool,
}

impl Dynamics for Congestion {
    fn cost(&self, ctx: &StepContext<'_>, state: usize, _action: usize) -> f64 {
        let c = ctx.aggregate[state] / self.max_weight;
        if self.inverted {
            1.0 - c
        } else {
            c
        }
    }

    /// Actions beyond the third repeat the three ring moves.
    fn transition(&self, _ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) {
        ring_transition(self.states, state, action % 3, self.noise, out);
    }
}

impl CongestionParams {
    pub(crate) fn build(&self, inverted: bool) -> Result<ModelSpec> {
        positive("states", self.states)?;
        positive("actions", self.actions)?;
        positive("horizon", self.horizon)?;
        positive("blocks", self.blocks)?;
        unit_interval("noise", self.noise)?;
        if self.start >= self.states {
            return Err(GmfgError::InvalidParams(format!("start cell {} outside {} states", self.start, self.states)));
        }
        let grid = PopulationGrid::uniform(self.blocks)?;
        let graphon = GraphonSpec::complete(self.blocks)?;
        let mut start = vec![0.0; self.states];
        start[self.start] = 1.0;
        let dynamics = Congestion { states: self.states, noise: self.noise, max_weight: graphon.max_weight(), inverted };
        ModelSpec::new(self.horizon, self.states, self.actions, grid, graphon, vec![start; self.blocks], Arc::new(dynamics))
    }
}
