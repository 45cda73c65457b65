//! Flat per-block tables. Every table is block-major so one block's data
//! is a contiguous chunk.

use serde::{Deserialize, Serialize};

use crate::error::{GmfgError, Result};
use crate::model::{is_distribution, Dims, StepContext};

/// `π[b][h][s] ∈ Δ(A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyProfile {
    dims: Dims,
    probs: Vec<f64>,
}

impl PolicyProfile {
    pub fn uniform(dims: Dims) -> Self {
        let n = dims.blocks * dims.horizon * dims.states * dims.actions;
        Self { dims, probs: vec![1.0 / dims.actions as f64; n] }
    }

    /// Builds a profile from a function returning each row.
    pub fn from_fn<F>(dims: Dims, mut row: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> Vec<f64>,
    {
        let mut probs = Vec::with_capacity(dims.blocks * dims.horizon * dims.states * dims.actions);
        for b in 0..dims.blocks {
            for h in 0..dims.horizon {
                for s in 0..dims.states {
                    let r = row(b, h, s);
                    if r.len() != dims.actions {
                        return Err(GmfgError::Dimension(format!("policy row has {} entries, expected {}", r.len(), dims.actions)));
                    }
                    probs.extend_from_slice(&r);
                }
            }
        }
        let p = Self { dims, probs };
        p.validate()?;
        Ok(p)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    fn offset(&self, b: usize, h: usize, s: usize) -> usize {
        ((b * self.dims.horizon + h) * self.dims.states + s) * self.dims.actions
    }

    pub fn row(&self, b: usize, h: usize, s: usize) -> &[f64] {
        let o = self.offset(b, h, s);
        &self.probs[o..o + self.dims.actions]
    }

    pub fn row_mut(&mut self, b: usize, h: usize, s: usize) -> &mut [f64] {
        let o = self.offset(b, h, s);
        let a = self.dims.actions;
        &mut self.probs[o..o + a]
    }

    pub fn block(&self, b: usize) -> &[f64] {
        let n = self.block_len();
        &self.probs[b * n..(b + 1) * n]
    }

    /// Disjoint mutable chunks, one per block.
    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let n = self.block_len();
        self.probs.chunks_mut(n).collect()
    }

    fn block_len(&self) -> usize {
        self.dims.horizon * self.dims.states * self.dims.actions
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn min_entry(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Every row a distribution within `1e-10`.
    pub fn validate(&self) -> Result<()> {
        for chunk in self.probs.chunks(self.dims.actions) {
            if !is_distribution(chunk, 1e-10) {
                return Err(GmfgError::InvalidParams("policy row is not a probability distribution".into()));
            }
        }
        Ok(())
    }

    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        if self.dims != dims {
            return Err(GmfgError::Dimension(format!("policy dims {:?} do not match model {:?}", self.dims, dims)));
        }
        Ok(())
    }
}

/// Row offset helper for `[b][h][s]` state tables with `H` steps.
fn state_offset(horizon: usize, states: usize, b: usize, h: usize) -> usize {
    (b * horizon + h) * states
}

/// `μ[b][h] ∈ Δ(S)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowProfile {
    blocks: usize,
    horizon: usize,
    states: usize,
    mass: Vec<f64>,
}

impl FlowProfile {
    pub fn zeros(blocks: usize, horizon: usize, states: usize) -> Self {
        Self { blocks, horizon, states, mass: vec![0.0; blocks * horizon * states] }
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn at(&self, b: usize, h: usize) -> &[f64] {
        let o = state_offset(self.horizon, self.states, b, h);
        &self.mass[o..o + self.states]
    }

    pub fn at_mut(&mut self, b: usize, h: usize) -> &mut [f64] {
        let o = state_offset(self.horizon, self.states, b, h);
        let s = self.states;
        &mut self.mass[o..o + s]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mass
    }

    /// `α·self + (1-α)·other`.
    pub fn mix(&self, other: &Self, alpha: f64) -> Result<Self> {
        if (self.blocks, self.horizon, self.states) != (other.blocks, other.horizon, other.states) {
            return Err(GmfgError::Dimension("flows have different shapes".into()));
        }
        let mass = self.mass.iter().zip(&other.mass).map(|(x, y)| alpha * x + (1.0 - alpha) * y).collect();
        Ok(Self { mass, ..*self })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mass.iter().zip(&other.mass).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        if (self.blocks, self.horizon, self.states) != (dims.blocks, dims.horizon, dims.states) {
            return Err(GmfgError::Dimension(format!(
                "flow shape ({}, {}, {}) does not match model {:?}",
                self.blocks, self.horizon, self.states, dims
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
impl FlowProfile {
    pub(crate) fn from_parts(blocks: usize, horizon: usize, states: usize, mass: Vec<f64>) -> Self {
        debug_assert_eq!(mass.len(), blocks * horizon * states);
        Self { blocks, horizon, states, mass }
    }
}

/// `z[b][h] = Σ_{b'} W_h[b,b'] ν_{b'} μ[b'][h]`, together with the
/// per-source terms of that sum.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateProfile {
    blocks: usize,
    horizon: usize,
    states: usize,
    totals: Vec<f64>,
    components: Vec<f64>,
}

impl AggregateProfile {
    pub(crate) fn zeros(blocks: usize, horizon: usize, states: usize) -> Self {
        Self {
            blocks,
            horizon,
            states,
            totals: vec![0.0; blocks * horizon * states],
            components: vec![0.0; blocks * horizon * blocks * states],
        }
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn at(&self, b: usize, h: usize) -> &[f64] {
        let o = state_offset(self.horizon, self.states, b, h);
        &self.totals[o..o + self.states]
    }

    /// Row-major `B x S` per-source terms for agent block `b` at step `h`.
    pub fn components(&self, b: usize, h: usize) -> &[f64] {
        let n = self.blocks * self.states;
        let o = (b * self.horizon + h) * n;
        &self.components[o..o + n]
    }

    pub fn context(&self, b: usize, h: usize) -> StepContext<'_> {
        StepContext { block: b, step: h, aggregate: self.at(b, h), components: self.components(b, h) }
    }

    pub(crate) fn step_mut(&mut self, b: usize, h: usize) -> (&mut [f64], &mut [f64]) {
        let o = state_offset(self.horizon, self.states, b, h);
        let n = self.blocks * self.states;
        let c = (b * self.horizon + h) * n;
        (&mut self.totals[o..o + self.states], &mut self.components[c..c + n])
    }

    pub fn check_dims(&self, dims: Dims) -> Result<()> {
        if (self.blocks, self.horizon, self.states) != (dims.blocks, dims.horizon, dims.states) {
            return Err(GmfgError::Dimension(format!(
                "aggregate shape ({}, {}, {}) does not match model {:?}",
                self.blocks, self.horizon, self.states, dims
            )));
        }
        Ok(())
    }
}

/// Regularized `Q[b][h][s][a]` and `V[b][h][s]` for `h = 0..=H`, with the
/// terminal row `V[b][H] ≡ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTables {
    dims: Dims,
    lambda: f64,
    q: Vec<f64>,
    v: Vec<f64>,
}

impl ValueTables {
    pub(crate) fn zeros(dims: Dims, lambda: f64) -> Self {
        Self {
            dims,
            lambda,
            q: vec![0.0; dims.blocks * dims.horizon * dims.states * dims.actions],
            v: vec![0.0; dims.blocks * (dims.horizon + 1) * dims.states],
        }
    }

    pub(crate) fn from_blocks(dims: Dims, lambda: f64, blocks: Vec<(Vec<f64>, Vec<f64>)>) -> Self {
        let mut out = Self::zeros(dims, lambda);
        let qn = dims.horizon * dims.states * dims.actions;
        let vn = (dims.horizon + 1) * dims.states;
        for (b, (q, v)) in blocks.into_iter().enumerate() {
            out.q[b * qn..(b + 1) * qn].copy_from_slice(&q);
            out.v[b * vn..(b + 1) * vn].copy_from_slice(&v);
        }
        out
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn q(&self, b: usize, h: usize, s: usize) -> &[f64] {
        let o = ((b * self.dims.horizon + h) * self.dims.states + s) * self.dims.actions;
        &self.q[o..o + self.dims.actions]
    }

    /// `V[b][h]` for `h` in `0..=H`.
    pub fn v(&self, b: usize, h: usize) -> &[f64] {
        let o = (b * (self.dims.horizon + 1) + h) * self.dims.states;
        &self.v[o..o + self.dims.states]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims() -> Dims {
        Dims { blocks: 2, horizon: 3, states: 4, actions: 5 }
    }

    #[test]
    fn uniform_policy_is_valid() {
        let p = PolicyProfile::uniform(dims());
        p.validate().unwrap();
        assert_eq!(p.row(1, 2, 3), &[0.2; 5]);
    }

    #[test]
    fn block_chunks_are_disjoint_and_ordered() {
        let mut p = PolicyProfile::uniform(dims());
        {
            let mut chunks = p.blocks_mut();
            chunks[1][0] = 0.6;
            chunks[1][1] = 0.0;
        }
        assert_eq!(p.row(1, 0, 0)[0], 0.6);
        assert_eq!(p.row(0, 0, 0)[0], 0.2);
        assert!(p.validate().is_err());
    }

    #[test]
    fn from_fn_rejects_wrong_row_length() {
        assert!(PolicyProfile::from_fn(dims(), |_, _, _| vec![1.0]).is_err());
    }

    #[test]
    fn flow_mix_is_convex_combination() {
        let mut a = FlowProfile::zeros(1, 1, 2);
        let mut b = FlowProfile::zeros(1, 1, 2);
        a.at_mut(0, 0).copy_from_slice(&[1.0, 0.0]);
        b.at_mut(0, 0).copy_from_slice(&[0.0, 1.0]);
        let m = a.mix(&b, 0.25).unwrap();
        assert_eq!(m.at(0, 0), &[0.25, 0.75]);
    }
}
