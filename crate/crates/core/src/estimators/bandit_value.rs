use crate::error::{GmfgError, Result};
use crate::schedule::ScheduleRule;

/// `N[b][h][s]`: visits of state `s` at step `h` by block `b`'s agent.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitCounter {
    horizon: usize,
    states: usize,
    counts: Vec<u64>,
}

impl VisitCounter {
    pub fn new(blocks: usize, horizon: usize, states: usize) -> Self {
        Self { horizon, states, counts: vec![0; blocks * horizon * states] }
    }

    fn index(&self, b: usize, h: usize, s: usize) -> usize {
        (b * self.horizon + h) * self.states + s
    }

    pub fn count(&self, b: usize, h: usize, s: usize) -> u64 {
        self.counts[self.index(b, h, s)]
    }

    /// Increments and returns the new count.
    pub fn register(&mut self, b: usize, h: usize, s: usize) -> u64 {
        let i = self.index(b, h, s);
        self.counts[i] += 1;
        self.counts[i]
    }
}

/// Running estimates `V̂[b][h][s]`, initialised to zero, with `V̂[b][H] ≡ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditValueState {
    horizon: usize,
    states: usize,
    actions: usize,
    values: Vec<f64>,
    visits: VisitCounter,
}

impl BanditValueState {
    pub fn new(blocks: usize, horizon: usize, states: usize, actions: usize) -> Self {
        Self {
            horizon,
            states,
            actions,
            values: vec![0.0; blocks * (horizon + 1) * states],
            visits: VisitCounter::new(blocks, horizon, states),
        }
    }

    fn index(&self, b: usize, h: usize, s: usize) -> usize {
        (b * (self.horizon + 1) + h) * self.states + s
    }

    /// `V̂[b][h][s]` for `h` in `0..=H`.
    pub fn value(&self, b: usize, h: usize, s: usize) -> f64 {
        self.values[self.index(b, h, s)]
    }

    pub fn visits(&self) -> &VisitCounter {
        &self.visits
    }

    pub fn register_visit(&mut self, b: usize, h: usize, s: usize) -> u64 {
        self.visits.register(b, h, s)
    }

    /// Clamp range `[-λ(H-h)·ln A, H-h]` for zero-based step `h`.
    pub fn bounds(&self, h: usize, lambda: f64) -> (f64, f64) {
        let remaining = (self.horizon - h) as f64;
        (-lambda * remaining * (self.actions as f64).ln(), remaining)
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }
}

/// `V̂ ← (1-β_k)V̂ + β_k·target` with `k` the registered visit count, then
/// clamped into the range of the regularized value at that step.
pub fn bandit_value_update(
    state: &mut BanditValueState,
    b: usize,
    h: usize,
    s: usize,
    target: f64,
    lambda: f64,
    rule: &ScheduleRule,
) -> Result<f64> {
    let k = state.visits.count(b, h, s);
    if k == 0 {
        return Err(GmfgError::UnregisteredVisit { block: b, step: h, state: s });
    }
    let beta = rule.value(k, state.horizon);
    let (lo, hi) = state.bounds(h, lambda);
    let i = state.index(b, h, s);
    let updated = ((1.0 - beta) * state.values[i] + beta * target).clamp(lo, hi);
    state.values[i] = updated;
    Ok(updated)
}
