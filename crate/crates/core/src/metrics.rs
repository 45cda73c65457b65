//! Exploitability, the flow-weighted KL distance to a reference
//! equilibrium, and a numeric probe of the weak monotonicity condition.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GmfgError, Result};
use crate::exec::Execution;
use crate::flow::{compute_aggregates, induce_flow};
use crate::model::{Dims, ModelSpec, PopulationGrid};
use crate::tables::{FlowProfile, PolicyProfile};
use crate::values::{best_response_dp, block_returns, regularized_value_iteration};

/// Unregularized best-response gap per block: `J(π, μ^π) - min_π' J(π', μ^π)`.
pub fn exploitability_gaps(model: &ModelSpec, policy: &PolicyProfile) -> Result<Vec<f64>> {
    let (_, agg) = induce_flow(model, policy)?;
    let own = regularized_value_iteration(model, policy, &agg, 0.0)?;
    let (_, best) = best_response_dp(model, &agg, 0.0)?;
    Ok(block_returns(model, &own).into_iter().zip(block_returns(model, &best)).map(|(j, j_best)| j - j_best).collect())
}

/// `Σ_b ν_b · gap_b`. Nonnegative up to rounding.
pub fn exploitability(model: &ModelSpec, policy: &PolicyProfile) -> Result<f64> {
    let gaps = exploitability_gaps(model, policy)?;
    Ok(gaps.iter().zip(model.grid().weights()).map(|(g, w)| g * w).sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub solver: String,
    pub iterations: u64,
    pub lambda: f64,
    pub seed: u64,
}

/// Numeric surrogate `(π*, μ*)` for the regularized equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSolution {
    pub policy: PolicyProfile,
    pub flow: FlowProfile,
    pub provenance: Provenance,
}

impl ReferenceSolution {
    pub fn new(model: &ModelSpec, policy: PolicyProfile, provenance: Provenance) -> Result<Self> {
        let (flow, _) = induce_flow(model, &policy)?;
        Ok(Self { policy, flow, provenance })
    }

    /// Checks dimensions and that the stored flow is the one `π*` induces.
    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        self.policy.check_dims(model.dims())?;
        self.flow.check_dims(model.dims())?;
        let (flow, _) = induce_flow(model, &self.policy)?;
        let diff = flow.max_abs_diff(&self.flow);
        if diff > 1e-10 {
            return Err(GmfgError::InvalidParams(format!("reference flow differs from the induced flow by {diff:e}")));
        }
        Ok(())
    }
}

/// `KL(p ‖ q)`; `+∞` when `q` misses part of the support of `p`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            total += pi * (pi / qi).ln();
        }
    }
    total.max(0.0)
}

/// `D(π) = Σ_b ν_b Σ_h Σ_s μ*[b][h](s) · KL(π*[b][h](·|s) ‖ π[b][h](·|s))`.
///
/// Returns `+∞` when `π` puts zero mass on an action `π*` uses at a state
/// in the support of `μ*`.
pub fn kl_metric(policy: &PolicyProfile, reference: &ReferenceSolution, grid: &PopulationGrid) -> Result<f64> {
    let dims = reference.policy.dims();
    policy.check_dims(dims)?;
    if grid.blocks() != dims.blocks {
        return Err(GmfgError::Dimension("population grid does not match the reference".into()));
    }
    let mut total = 0.0;
    for b in 0..dims.blocks {
        let mut block = 0.0;
        for h in 0..dims.horizon {
            for (s, &m) in reference.flow.at(b, h).iter().enumerate() {
                if m > 0.0 {
                    block += m * kl_divergence(reference.policy.row(b, h, s), policy.row(b, h, s));
                }
            }
        }
        total += grid.weight(b) * block;
    }
    Ok(total)
}

/// State-action occupancy `ρ[b][h] ∈ Δ(S x A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyProfile {
    dims: Dims,
    mass: Vec<f64>,
}

impl OccupancyProfile {
    pub fn new(dims: Dims, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != dims.blocks * dims.horizon * dims.states * dims.actions {
            return Err(GmfgError::Dimension("occupancy table has the wrong size".into()));
        }
        let o = Self { dims, mass };
        for slice in o.mass.chunks(dims.states * dims.actions) {
            if slice.iter().any(|x| !x.is_finite() || *x < 0.0) || (slice.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
                return Err(GmfgError::InvalidParams("occupancy slice is not a distribution over (s, a)".into()));
            }
        }
        Ok(o)
    }

    /// Flat Dirichlet(1) draw for every `(b, h)` slice.
    pub fn random<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> Self {
        let width = dims.states * dims.actions;
        let mut mass: Vec<f64> = (0..dims.blocks * dims.horizon * width).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        for slice in mass.chunks_mut(width) {
            let total: f64 = slice.iter().sum();
            slice.iter_mut().for_each(|x| *x /= total);
        }
        Self { dims, mass }
    }

    /// `ρ(s, a) = μ(s) π(a|s)`.
    pub fn from_policy(flow: &FlowProfile, policy: &PolicyProfile) -> Result<Self> {
        let dims = policy.dims();
        flow.check_dims(dims)?;
        let mut mass = Vec::with_capacity(dims.blocks * dims.horizon * dims.states * dims.actions);
        for b in 0..dims.blocks {
            for h in 0..dims.horizon {
                for (s, &m) in flow.at(b, h).iter().enumerate() {
                    mass.extend(policy.row(b, h, s).iter().map(|p| m * p));
                }
            }
        }
        Ok(Self { dims, mass })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn slice(&self, b: usize, h: usize) -> &[f64] {
        let w = self.dims.states * self.dims.actions;
        let o = (b * self.dims.horizon + h) * w;
        &self.mass[o..o + w]
    }

    pub fn marginals(&self) -> FlowProfile {
        let d = self.dims;
        let mut flow = FlowProfile::zeros(d.blocks, d.horizon, d.states);
        for b in 0..d.blocks {
            for h in 0..d.horizon {
                let rho = self.slice(b, h);
                for (s, m) in flow.at_mut(b, h).iter_mut().enumerate() {
                    *m = rho[s * d.actions..(s + 1) * d.actions].iter().sum();
                }
            }
        }
        flow
    }
}

/// `Σ_h Σ_b ν_b Σ_{s,a} (ρ - ρ̃)(s,a) · [c_h(s,a,z_h^b(μ)) - c_h(s,a,z_h^b(μ̃))]`.
///
/// Nonnegative for every pair on a weakly monotone game.
pub fn monotonicity_probe(model: &ModelSpec, rho: &OccupancyProfile, rho_tilde: &OccupancyProfile) -> Result<f64> {
    let dims = model.dims();
    if rho.dims != dims || rho_tilde.dims != dims {
        return Err(GmfgError::Dimension("occupancy tables do not match the model".into()));
    }
    let agg = compute_aggregates(&rho.marginals(), model.graphon(), model.grid())?;
    let agg_tilde = compute_aggregates(&rho_tilde.marginals(), model.graphon(), model.grid())?;
    let mut total = 0.0;
    for b in 0..dims.blocks {
        let mut block = 0.0;
        for h in 0..dims.horizon {
            let (ctx, ctx_tilde) = (agg.context(b, h), agg_tilde.context(b, h));
            let (r, rt) = (rho.slice(b, h), rho_tilde.slice(b, h));
            for s in 0..dims.states {
                for a in 0..dims.actions {
                    let i = s * dims.actions + a;
                    let dc = model.checked_cost(&ctx, s, a)? - model.checked_cost(&ctx_tilde, s, a)?;
                    block += (r[i] - rt[i]) * dc;
                }
            }
        }
        total += model.grid().weight(b) * block;
    }
    Ok(total)
}

/// Probe values on `pairs` random occupancy pairs; pair `i` draws from
/// ChaCha stream `i` of `seed`.
pub fn probe_random_pairs(exec: Execution, model: &ModelSpec, pairs: usize, seed: u64) -> Result<Vec<f64>> {
    let dims = model.dims();
    exec.map_range(pairs, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let rho = OccupancyProfile::random(dims, &mut rng);
        let rho_tilde = OccupancyProfile::random(dims, &mut rng);
        monotonicity_probe(model, &rho, &rho_tilde)
    })
    .into_iter()
    .collect()
}
