use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GmfgError, Result};
use crate::model::{Dynamics, GraphonSpec, ModelSpec, PopulationGrid, StepContext};

use super::crowd::{grid_move, MOVES};
use super::{positive, unit_interval};

/// Cyclic predator-prey on a square grid. Population `i` hunts `i - 1`
/// and is hunted by `i + 1` (indices mod `B`). With `n_x` the normalised
/// co-located mass of population `x`, the cost is
/// `(1 + n_{i+1}(s) - n_{i-1}(s)) / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredatorPreyParams {
    pub side: usize,
    pub horizon: usize,
    /// Start cell per population; at least three populations.
    pub starts: Vec<usize>,
    pub noise: f64,
}

impl Default for PredatorPreyParams {
    fn default() -> Self {
        Self { side: 5, horizon: 10, starts: vec![0, 4, 22], noise: 0.1 }
    }
}

struct PredatorPrey {
    side: usize,
    blocked: Vec<bool>,
    noise: f64,
    /// `W[b, b'] ν_{b'}` for the rescaling of each component.
    scale: Vec<f64>,
    blocks: usize,
}

impl PredatorPrey {
    fn normalised(&self, ctx: &StepContext<'_>, source: usize, state: usize) -> f64 {
        let s = self.scale[ctx.block * self.blocks + source];
        if s <= 0.0 {
            0.0
        } else {
            (ctx.component(source)[state] / s).min(1.0)
        }
    }
}

impl Dynamics for PredatorPrey {
    fn cost(&self, ctx: &StepContext<'_>, state: usize, _action: usize) -> f64 {
        let b = self.blocks;
        let predator = (ctx.block + 1) % b;
        let prey = (ctx.block + b - 1) % b;
        (1.0 + self.normalised(ctx, predator, state) - self.normalised(ctx, prey, state)) / 2.0
    }

    fn transition(&self, _ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) {
        out.fill(0.0);
        out[grid_move(self.side, self.side, &self.blocked, state, action)] += 1.0 - self.noise;
        for a in 0..MOVES.len() {
            out[grid_move(self.side, self.side, &self.blocked, state, a)] += self.noise / MOVES.len() as f64;
        }
    }
}

impl PredatorPreyParams {
    pub(crate) fn build(&self) -> Result<ModelSpec> {
        positive("side", self.side)?;
        positive("horizon", self.horizon)?;
        unit_interval("noise", self.noise)?;
        let blocks = self.starts.len();
        if blocks < 3 {
            return Err(GmfgError::InvalidParams("predator-prey needs at least three populations".into()));
        }
        let states = self.side * self.side;
        let mut initial = Vec::with_capacity(blocks);
        for &s in &self.starts {
            if s >= states {
                return Err(GmfgError::InvalidParams(format!("start cell {s} outside {states} cells")));
            }
            let mut mu = vec![0.0; states];
            mu[s] = 1.0;
            initial.push(mu);
        }
        let grid = PopulationGrid::uniform(blocks)?;
        let graphon = GraphonSpec::constant(blocks, 0.0, 1.0)?;
        let scale = (0..blocks * blocks).map(|i| graphon.weight(0, i / blocks, i % blocks) * grid.weight(i % blocks)).collect();
        let dynamics = PredatorPrey { side: self.side, blocked: vec![false; states], noise: self.noise, scale, blocks };
        ModelSpec::new(self.horizon, states, MOVES.len(), grid, graphon, initial, Arc::new(dynamics))
    }
}
