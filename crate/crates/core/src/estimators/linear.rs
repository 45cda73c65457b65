use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{GmfgError, Result};
use crate::model::{ModelSpec, StepContext};

/// Known feature map `φ(s, a, z) ∈ R^d` with `‖φ‖₂ ≤ 1`.
pub trait FeatureMap: Send + Sync {
    fn dim(&self) -> usize;

    fn features(&self, state: usize, action: usize, aggregate: &[f64], out: &mut [f64]);
}

/// `φ(s, a, z) = e_{s·A + a}`, which makes the linear model tabular.
#[derive(Debug, Clone, Copy)]
pub struct OneHotFeatures {
    pub states: usize,
    pub actions: usize,
}

impl FeatureMap for OneHotFeatures {
    fn dim(&self) -> usize {
        self.states * self.actions
    }

    fn features(&self, state: usize, action: usize, _aggregate: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        out[state * self.actions + action] = 1.0;
    }
}

/// Feature map plus, for synthetic games, the true per-step parameters
/// `θ*_h ∈ R^{S x d}`.
#[derive(Clone)]
pub struct LinearModelSpec {
    features: Arc<dyn FeatureMap>,
    truth: Option<Vec<DMatrix<f64>>>,
}

impl fmt::Debug for LinearModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearModelSpec").field("dim", &self.dim()).field("has_truth", &self.truth.is_some()).finish()
    }
}

impl LinearModelSpec {
    pub fn new(features: Arc<dyn FeatureMap>, truth: Option<Vec<DMatrix<f64>>>) -> Result<Self> {
        if features.dim() == 0 {
            return Err(GmfgError::InvalidParams("feature dimension must be positive".into()));
        }
        if let Some(t) = &truth {
            if t.iter().any(|m| m.ncols() != features.dim()) {
                return Err(GmfgError::Dimension("ground-truth parameters do not match the feature dimension".into()));
            }
        }
        Ok(Self { features, truth })
    }

    pub fn one_hot(states: usize, actions: usize) -> Self {
        Self { features: Arc::new(OneHotFeatures { states, actions }), truth: None }
    }

    pub fn dim(&self) -> usize {
        self.features.dim()
    }

    pub fn feature_map(&self) -> &Arc<dyn FeatureMap> {
        &self.features
    }

    pub fn features(&self, state: usize, action: usize, aggregate: &[f64], out: &mut [f64]) {
        self.features.features(state, action, aggregate, out)
    }

    pub fn truth(&self) -> Option<&[DMatrix<f64>]> {
        self.truth.as_deref()
    }

    pub fn check_model(&self, model: &ModelSpec) -> Result<()> {
        if let Some(t) = &self.truth {
            if t.len() != model.horizon() || t.iter().any(|m| m.nrows() != model.states()) {
                return Err(GmfgError::Dimension("ground-truth parameters do not match the model".into()));
            }
        }
        Ok(())
    }
}

/// `Q̂ = c_h(s, a, z) + ⟨θ̂_h φ(s, a, z), V_{h+1}⟩`, clipped into
/// `[-λ(H-h-1)·ln A, H-h]` for zero-based step `h = ctx.step`.
#[allow(clippy::too_many_arguments)]
pub fn linear_q_backup(
    model: &ModelSpec,
    linear: &LinearModelSpec,
    theta: &DMatrix<f64>,
    v_next: &[f64],
    ctx: &StepContext<'_>,
    state: usize,
    action: usize,
    lambda: f64,
) -> Result<f64> {
    let d = linear.dim();
    if theta.ncols() != d || theta.nrows() != model.states() || v_next.len() != model.states() {
        return Err(GmfgError::Dimension(format!(
            "θ̂ is {}x{}, V has {} entries; expected {}x{d} and {}",
            theta.nrows(),
            theta.ncols(),
            v_next.len(),
            model.states(),
            model.states()
        )));
    }
    let mut phi = vec![0.0; d];
    linear.features(state, action, ctx.aggregate, &mut phi);
    let c = model.checked_cost(ctx, state, action)?;
    let mut expected = 0.0;
    for (s_next, v) in v_next.iter().enumerate() {
        let p: f64 = theta.row(s_next).iter().zip(&phi).map(|(t, f)| t * f).sum();
        expected += p * v;
    }
    let remaining = (model.horizon() - ctx.step) as f64;
    let lo = -lambda * (remaining - 1.0) * (model.actions() as f64).ln();
    Ok((c + expected).clamp(lo, remaining))
}
