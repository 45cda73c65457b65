use crate::error::{GmfgError, Result};
use crate::flow::{compute_aggregates, induce_flow_with};
use crate::model::{Dims, ModelSpec};
use crate::tables::{FlowProfile, PolicyProfile};
use crate::values::best_response_dp;

use super::record::{RunState, SolverConfig, SolverOutput};

/// Fictitious play: best-respond to the average of past induced flows.
///
/// Round `t` best-responds to `μ̄_{t-1}` (the uniform-policy flow for
/// `t = 1`), then sets `μ̄_t = ((t-1)·μ̄_{t-1} + μ_{BR,t}) / t`. The reported
/// policy is the state-weighted mixture `π̄(a|s) ∝ Σ_k μ_k(s) π_k(a|s)`,
/// which induces `μ̄_t` whenever transitions do not depend on the aggregate.
pub fn solve_fictitious_play(model: &ModelSpec, config: &SolverConfig) -> Result<SolverOutput> {
    if config.lambda != 0.0 {
        return Err(GmfgError::InvalidParams(format!("fictitious play uses unregularized best responses, got λ = {}", config.lambda)));
    }
    config.validate(model)?;
    let dims = model.dims();
    let exec = config.execution;
    let uniform = PolicyProfile::uniform(dims);
    let (mut average, _) = induce_flow_with(exec, model, &uniform)?;
    let mut weighted = vec![0.0; uniform.as_slice().len()];
    let mut run = RunState::new(uniform);
    for t in 1..=config.iterations {
        let agg = compute_aggregates(&average, model.graphon(), model.grid())?;
        let (response, _) = best_response_dp(model, &agg, 0.0)?;
        let (flow, _) = induce_flow_with(exec, model, &response)?;
        accumulate(&mut weighted, &flow, &response);
        average = running_average(&average, &flow, t)?;
        run.policy = mixture(&weighted, dims)?;
        run.finish_iteration(model, config, t)?;
    }
    let mut out = run.into_output();
    out.average_flow = Some(average);
    Ok(out)
}

/// `((t-1)·previous + latest) / t`.
pub fn running_average(previous: &FlowProfile, latest: &FlowProfile, t: u64) -> Result<FlowProfile> {
    latest.mix(previous, 1.0 / t as f64)
}

fn accumulate(weighted: &mut [f64], flow: &FlowProfile, policy: &PolicyProfile) {
    let d = policy.dims();
    for b in 0..d.blocks {
        for h in 0..d.horizon {
            for (s, &m) in flow.at(b, h).iter().enumerate() {
                let o = ((b * d.horizon + h) * d.states + s) * d.actions;
                for (w, p) in weighted[o..o + d.actions].iter_mut().zip(policy.row(b, h, s)) {
                    *w += m * p;
                }
            }
        }
    }
}

/// Normalised rows of `weighted`; uniform where no round reached the state.
fn mixture(weighted: &[f64], dims: Dims) -> Result<PolicyProfile> {
    PolicyProfile::from_fn(dims, |b, h, s| {
        let o = ((b * dims.horizon + h) * dims.states + s) * dims.actions;
        let row = &weighted[o..o + dims.actions];
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter().map(|w| w / total).collect()
        } else {
            vec![1.0 / dims.actions as f64; dims.actions]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn running_average_equals_direct_mean() {
        let flows: Vec<FlowProfile> = (0..7)
            .map(|k| {
                let mut f = FlowProfile::zeros(1, 1, 3);
                let x = (k as f64 + 1.0) / 10.0;
                f.at_mut(0, 0).copy_from_slice(&[x, 0.5 * (1.0 - x), 0.5 * (1.0 - x)]);
                f
            })
            .collect();
        let mut avg = FlowProfile::zeros(1, 1, 3);
        for (k, f) in flows.iter().enumerate() {
            avg = running_average(&avg, f, k as u64 + 1).unwrap();
            let n = (k + 1) as f64;
            for s in 0..3 {
                let direct: f64 = flows[..=k].iter().map(|g| g.at(0, 0)[s]).sum::<f64>() / n;
                assert!((avg.at(0, 0)[s] - direct).abs() < 1e-15);
            }
        }
    }
}
