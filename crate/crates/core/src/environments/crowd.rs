use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GmfgError, Result};
use crate::model::{Dynamics, GraphonSpec, ModelSpec, PopulationGrid, StepContext};

use super::{aggregate_cap, positive, unit_interval};

/// Multi-population crowd avoidance on a `width x height` grid.
///
/// Actions are stay, up, down, left, right; moves into a wall or a
/// forbidden cell leave the agent in place. The cost is the co-located
/// mass seen through the graphon, divided by its largest possible value.
/// With the default graphon (within 0, between 1) that is exactly the
/// other populations' mass in the agent's cell.
///
/// The default is a 7-cell corridor; [`CrowdAvoidanceParams::grid`] gives
/// a 7 x 7 room split by a wall with a single doorway.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrowdAvoidanceParams {
    pub width: usize,
    pub height: usize,
    pub horizon: usize,
    /// Start cell per population; the number of entries sets the block count.
    pub starts: Vec<usize>,
    pub forbidden: Vec<usize>,
    pub within_weight: f64,
    pub between_weight: f64,
    pub noise: f64,
}

impl Default for CrowdAvoidanceParams {
    fn default() -> Self {
        Self {
            width: 7,
            height: 1,
            horizon: 10,
            starts: vec![0, 6],
            forbidden: Vec::new(),
            within_weight: 0.0,
            between_weight: 1.0,
            noise: 0.0,
        }
    }
}

impl CrowdAvoidanceParams {
    pub fn grid() -> Self {
        let forbidden = (0..7).filter(|&r| r != 3).map(|r| r * 7 + 3).collect();
        Self { width: 7, height: 7, starts: vec![3 * 7, 3 * 7 + 6], forbidden, ..Self::default() }
    }
}

pub(crate) const MOVES: [(isize, isize); 5] = [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)];

/// Deterministic grid move; blocked moves stay in place.
pub(crate) fn grid_move(width: usize, height: usize, blocked: &[bool], state: usize, action: usize) -> usize {
    let (r, c) = ((state / width) as isize, (state % width) as isize);
    let (dr, dc) = MOVES[action];
    let (nr, nc) = (r + dr, c + dc);
    if nr < 0 || nc < 0 || nr >= height as isize || nc >= width as isize {
        return state;
    }
    let next = nr as usize * width + nc as usize;
    if blocked[next] {
        state
    } else {
        next
    }
}

struct CrowdAvoidance {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    noise: f64,
    cap: f64,
}

impl Dynamics for CrowdAvoidance {
    fn cost(&self, ctx: &StepContext<'_>, state: usize, _action: usize) -> f64 {
        if self.cap <= 0.0 {
            return 0.0;
        }
        (ctx.aggregate[state] / self.cap).min(1.0)
    }

    /// With probability `noise` the action is replaced by a uniform one.
    fn transition(&self, _ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) {
        out.fill(0.0);
        out[grid_move(self.width, self.height, &self.blocked, state, action)] += 1.0 - self.noise;
        for a in 0..MOVES.len() {
            out[grid_move(self.width, self.height, &self.blocked, state, a)] += self.noise / MOVES.len() as f64;
        }
    }
}

impl CrowdAvoidanceParams {
    pub(crate) fn build(&self) -> Result<ModelSpec> {
        positive("width", self.width)?;
        positive("height", self.height)?;
        positive("horizon", self.horizon)?;
        positive("population count", self.starts.len())?;
        unit_interval("noise", self.noise)?;
        let states = self.width * self.height;
        let mut blocked = vec![false; states];
        for &f in &self.forbidden {
            if f >= states {
                return Err(GmfgError::InvalidParams(format!("forbidden cell {f} outside {states} cells")));
            }
            blocked[f] = true;
        }
        if blocked.iter().all(|b| *b) {
            return Err(GmfgError::InvalidParams("forbidden cells cover every state".into()));
        }
        let mut initial = Vec::with_capacity(self.starts.len());
        for &s in &self.starts {
            if s >= states || blocked[s] {
                return Err(GmfgError::InvalidParams(format!("start cell {s} is outside the grid or forbidden")));
            }
            let mut mu = vec![0.0; states];
            mu[s] = 1.0;
            initial.push(mu);
        }
        let blocks = self.starts.len();
        let grid = PopulationGrid::uniform(blocks)?;
        let graphon = GraphonSpec::constant(blocks, self.within_weight, self.between_weight)?;
        let cap = aggregate_cap(&graphon, &grid);
        let dynamics = CrowdAvoidance { width: self.width, height: self.height, blocked, noise: self.noise, cap };
        ModelSpec::new(self.horizon, states, MOVES.len(), grid, graphon, initial, Arc::new(dynamics))
    }
}
