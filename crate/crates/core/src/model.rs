//! Game description: population blocks, block graphons and the cost and
//! transition rules.

use std::fmt;
use std::sync::Arc;

use crate::error::{GmfgError, Result};
use crate::flow::compute_aggregates;
use crate::tables::FlowProfile;

/// Tolerance for distributions supplied by callers and environments.
pub const SIMPLEX_TOL: f64 = 1e-10;

/// Population index set discretized into blocks with masses `ν_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationGrid {
    weights: Vec<f64>,
}

impl PopulationGrid {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(GmfgError::InvalidModel("population grid needs at least one block".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(GmfgError::InvalidModel("block weights must be finite and nonnegative".into()));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(GmfgError::InvalidModel("block weights must have positive total mass".into()));
        }
        Ok(Self { weights })
    }

    /// `blocks` blocks of equal mass, total mass one.
    pub fn uniform(blocks: usize) -> Result<Self> {
        if blocks == 0 {
            return Err(GmfgError::InvalidModel("population grid needs at least one block".into()));
        }
        Self::new(vec![1.0 / blocks as f64; blocks])
    }

    pub fn blocks(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, block: usize) -> f64 {
        self.weights[block]
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Piecewise-constant graphon: one symmetric `B x B` matrix per step, or a
/// single matrix broadcast over all steps.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphonSpec {
    blocks: usize,
    max_weight: f64,
    steps: Vec<Vec<f64>>,
}

impl GraphonSpec {
    pub fn new(blocks: usize, matrix: Vec<f64>) -> Result<Self> {
        Self::per_step(blocks, vec![matrix])
    }

    pub fn per_step(blocks: usize, steps: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_max_weight(blocks, steps, 1.0)
    }

    pub fn with_max_weight(blocks: usize, steps: Vec<Vec<f64>>, max_weight: f64) -> Result<Self> {
        if blocks == 0 || steps.is_empty() {
            return Err(GmfgError::InvalidModel("graphon needs at least one block and one step".into()));
        }
        if !max_weight.is_finite() || max_weight <= 0.0 {
            return Err(GmfgError::InvalidModel(format!("graphon bound {max_weight} must be positive and finite")));
        }
        for (h, w) in steps.iter().enumerate() {
            if w.len() != blocks * blocks {
                return Err(GmfgError::Dimension(format!(
                    "graphon step {h} has {} entries, expected {}",
                    w.len(),
                    blocks * blocks
                )));
            }
            for i in 0..blocks {
                for j in 0..blocks {
                    let v = w[i * blocks + j];
                    if !v.is_finite() || v < 0.0 || v > max_weight {
                        return Err(GmfgError::InvalidModel(format!(
                            "graphon entry ({i},{j}) at step {h} is {v}, outside [0, {max_weight}]"
                        )));
                    }
                    if v != w[j * blocks + i] {
                        return Err(GmfgError::InvalidModel(format!("graphon step {h} is not symmetric at ({i},{j})")));
                    }
                }
            }
        }
        Ok(Self { blocks, max_weight, steps })
    }

    /// Constant within-block and between-block weights.
    pub fn constant(blocks: usize, within: f64, between: f64) -> Result<Self> {
        let mut w = vec![between; blocks * blocks];
        for b in 0..blocks {
            w[b * blocks + b] = within;
        }
        Self::new(blocks, w)
    }

    /// `W ≡ 1`: every block interacts with every block.
    pub fn complete(blocks: usize) -> Result<Self> {
        Self::constant(blocks, 1.0, 1.0)
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    /// Number of stored step matrices (1 when broadcast).
    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn weight(&self, step: usize, block: usize, other: usize) -> f64 {
        let w = if self.steps.len() == 1 { &self.steps[0] } else { &self.steps[step] };
        w[block * self.blocks + other]
    }
}

/// Everything a cost or transition rule may look at for one agent at one
/// step. `aggregate` is `z_h^b`; `components` holds the per-source-block
/// terms `W_h[b,b'] ν_{b'} μ_h^{b'}` (row-major `B x S`) whose sum is the
/// aggregate.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    pub block: usize,
    pub step: usize,
    pub aggregate: &'a [f64],
    pub components: &'a [f64],
}

impl<'a> StepContext<'a> {
    pub fn component(&self, source: usize) -> &'a [f64] {
        let s = self.aggregate.len();
        &self.components[source * s..(source + 1) * s]
    }
}

/// Cost and transition rules `c_h(s, a, z)` and `P_h(· | s, a, z)`.
///
/// Steps are zero-based. Costs must lie in `[0, 1]`; `transition` writes a
/// probability vector over next states into `out` (length `S`).
pub trait Dynamics: Send + Sync {
    fn cost(&self, ctx: &StepContext<'_>, state: usize, action: usize) -> f64;

    fn transition(&self, ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]);
}

/// z-independent tabular rules, mostly for tests and small examples.
///
/// `costs` is indexed `[h][s][a]` and `transitions` `[h][s][a][s']`, both
/// flattened.
#[derive(Debug, Clone)]
pub struct TabularDynamics {
    states: usize,
    actions: usize,
    costs: Vec<f64>,
    transitions: Vec<f64>,
}

impl TabularDynamics {
    pub fn new(horizon: usize, states: usize, actions: usize, costs: Vec<f64>, transitions: Vec<f64>) -> Result<Self> {
        if costs.len() != horizon * states * actions {
            return Err(GmfgError::Dimension(format!("expected {} costs, got {}", horizon * states * actions, costs.len())));
        }
        if transitions.len() != horizon * states * actions * states {
            return Err(GmfgError::Dimension(format!(
                "expected {} transition entries, got {}",
                horizon * states * actions * states,
                transitions.len()
            )));
        }
        Ok(Self { states, actions, costs, transitions })
    }
}

impl Dynamics for TabularDynamics {
    fn cost(&self, ctx: &StepContext<'_>, state: usize, action: usize) -> f64 {
        self.costs[(ctx.step * self.states + state) * self.actions + action]
    }

    fn transition(&self, ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) {
        let start = ((ctx.step * self.states + state) * self.actions + action) * self.states;
        out.copy_from_slice(&self.transitions[start..start + self.states]);
    }
}

/// Sizes shared by every per-block table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Dims {
    pub blocks: usize,
    pub horizon: usize,
    pub states: usize,
    pub actions: usize,
}

/// Full game description `(I, S, A, P, c, W, μ1, H)` on a block grid.
#[derive(Clone)]
pub struct ModelSpec {
    horizon: usize,
    states: usize,
    actions: usize,
    grid: PopulationGrid,
    graphon: GraphonSpec,
    initial: Vec<Vec<f64>>,
    dynamics: Arc<dyn Dynamics>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("horizon", &self.horizon)
            .field("states", &self.states)
            .field("actions", &self.actions)
            .field("grid", &self.grid)
            .field("graphon", &self.graphon)
            .field("initial", &self.initial)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    /// Validates sizes, the graphon, the initial distributions, and probes
    /// the rules against the aggregates of the initial and uniform flows.
    pub fn new(
        horizon: usize,
        states: usize,
        actions: usize,
        grid: PopulationGrid,
        graphon: GraphonSpec,
        initial: Vec<Vec<f64>>,
        dynamics: Arc<dyn Dynamics>,
    ) -> Result<Self> {
        if horizon == 0 || states == 0 || actions == 0 {
            return Err(GmfgError::InvalidModel("horizon, state count and action count must be positive".into()));
        }
        if graphon.blocks() != grid.blocks() {
            return Err(GmfgError::Dimension(format!(
                "graphon has {} blocks, population grid has {}",
                graphon.blocks(),
                grid.blocks()
            )));
        }
        if graphon.step_count() != 1 && graphon.step_count() != horizon {
            return Err(GmfgError::Dimension(format!(
                "graphon has {} step matrices, expected 1 or {horizon}",
                graphon.step_count()
            )));
        }
        if initial.len() != grid.blocks() {
            return Err(GmfgError::Dimension(format!(
                "{} initial distributions for {} blocks",
                initial.len(),
                grid.blocks()
            )));
        }
        for (b, mu) in initial.iter().enumerate() {
            if mu.len() != states {
                return Err(GmfgError::Dimension(format!("initial distribution of block {b} has length {}", mu.len())));
            }
            if !is_distribution(mu, SIMPLEX_TOL) {
                return Err(GmfgError::InvalidModel(format!("initial distribution of block {b} is not a distribution")));
            }
        }
        let model = Self { horizon, states, actions, grid, graphon, initial, dynamics };
        model.probe_rules()?;
        Ok(model)
    }

    fn probe_rules(&self) -> Result<()> {
        let dims = self.dims();
        let mut from_initial = FlowProfile::zeros(dims.blocks, dims.horizon, dims.states);
        let mut uniform = FlowProfile::zeros(dims.blocks, dims.horizon, dims.states);
        for b in 0..dims.blocks {
            for h in 0..dims.horizon {
                from_initial.at_mut(b, h).copy_from_slice(&self.initial[b]);
                uniform.at_mut(b, h).fill(1.0 / dims.states as f64);
            }
        }
        let mut row = vec![0.0; self.states];
        for flow in [&from_initial, &uniform] {
            let agg = compute_aggregates(flow, &self.graphon, &self.grid)?;
            for b in 0..dims.blocks {
                for h in 0..dims.horizon {
                    let ctx = agg.context(b, h);
                    for s in 0..self.states {
                        for a in 0..self.actions {
                            self.checked_cost(&ctx, s, a)?;
                            self.checked_transition(&ctx, s, a, &mut row)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    pub fn blocks(&self) -> usize {
        self.grid.blocks()
    }

    pub fn dims(&self) -> Dims {
        Dims { blocks: self.grid.blocks(), horizon: self.horizon, states: self.states, actions: self.actions }
    }

    pub fn grid(&self) -> &PopulationGrid {
        &self.grid
    }

    pub fn graphon(&self) -> &GraphonSpec {
        &self.graphon
    }

    pub fn initial(&self, block: usize) -> &[f64] {
        &self.initial[block]
    }

    pub fn dynamics(&self) -> &Arc<dyn Dynamics> {
        &self.dynamics
    }

    pub fn cost(&self, ctx: &StepContext<'_>, state: usize, action: usize) -> f64 {
        self.dynamics.cost(ctx, state, action)
    }

    pub fn transition(&self, ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) {
        self.dynamics.transition(ctx, state, action, out)
    }

    /// Cost with the `[0, 1]` range enforced.
    pub fn checked_cost(&self, ctx: &StepContext<'_>, state: usize, action: usize) -> Result<f64> {
        let c = self.dynamics.cost(ctx, state, action);
        if !(0.0..=1.0).contains(&c) {
            return Err(GmfgError::CostOutOfRange { step: ctx.step, state, action, value: c });
        }
        Ok(c)
    }

    /// Transition row with the simplex check enforced.
    pub fn checked_transition(&self, ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) -> Result<()> {
        self.dynamics.transition(ctx, state, action, out);
        if !is_distribution(out, SIMPLEX_TOL) {
            return Err(GmfgError::BadTransition { step: ctx.step, state, action, sum: out.iter().sum() });
        }
        Ok(())
    }
}

pub(crate) fn is_distribution(p: &[f64], tol: f64) -> bool {
    p.iter().all(|x| x.is_finite() && *x >= 0.0) && (p.iter().sum::<f64>() - 1.0).abs() <= tol
}
