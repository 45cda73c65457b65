//! Backward recursions: regularized policy evaluation and best responses.

use crate::error::{GmfgError, Result};
use crate::exec::Execution;
use crate::flow::compute_aggregates;
use crate::model::ModelSpec;
use crate::tables::{AggregateProfile, FlowProfile, PolicyProfile, ValueTables};

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(GmfgError::InvalidRegularization(lambda));
    }
    Ok(())
}

/// `π ln π` with the `0 ln 0 = 0` convention.
#[inline]
pub(crate) fn entropy_term(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln()
    } else {
        0.0
    }
}

/// One backward pass for block `b`. `choose` receives the Q row and fills
/// the policy row (when it produces one), returning `V`.
fn backward_block<F>(model: &ModelSpec, agg: &AggregateProfile, b: usize, mut choose: F) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(usize, usize, &[f64]) -> f64,
{
    let dims = model.dims();
    let (horizon, states, actions) = (dims.horizon, dims.states, dims.actions);
    let mut q = vec![0.0; horizon * states * actions];
    let mut v = vec![0.0; (horizon + 1) * states];
    let mut row = vec![0.0; states];
    for h in (0..horizon).rev() {
        let ctx = agg.context(b, h);
        let (head, tail) = v.split_at_mut((h + 1) * states);
        let v_next = &tail[..states];
        let v_here = &mut head[h * states..];
        for s in 0..states {
            let q_row = &mut q[(h * states + s) * actions..(h * states + s + 1) * actions];
            for (a, q_sa) in q_row.iter_mut().enumerate() {
                let c = model.checked_cost(&ctx, s, a)?;
                model.transition(&ctx, s, a, &mut row);
                *q_sa = c + row.iter().zip(v_next).map(|(p, v)| p * v).sum::<f64>();
            }
            v_here[s] = choose(h, s, q_row);
        }
    }
    Ok((q, v))
}

/// `Q^λ` and `V^λ` of `policy` against fixed aggregates, with `V[H] ≡ 0`.
pub fn regularized_value_iteration(model: &ModelSpec, policy: &PolicyProfile, aggregates: &AggregateProfile, lambda: f64) -> Result<ValueTables> {
    regularized_value_iteration_with(Execution::default(), model, policy, aggregates, lambda)
}

pub fn regularized_value_iteration_with(
    exec: Execution,
    model: &ModelSpec,
    policy: &PolicyProfile,
    aggregates: &AggregateProfile,
    lambda: f64,
) -> Result<ValueTables> {
    check_lambda(lambda)?;
    let dims = model.dims();
    policy.check_dims(dims)?;
    aggregates.check_dims(dims)?;
    let blocks: Vec<Result<(Vec<f64>, Vec<f64>)>> = exec.map_range(dims.blocks, |b| {
        backward_block(model, aggregates, b, |h, s, q_row| {
            policy
                .row(b, h, s)
                .iter()
                .zip(q_row)
                .map(|(&p, &q)| p * q + lambda * entropy_term(p))
                .sum()
        })
    });
    let blocks = blocks.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ValueTables::from_blocks(dims, lambda, blocks))
}

/// Optimal (λ = 0) or soft-optimal (λ > 0) responses to fixed aggregates.
///
/// For λ = 0 the policy is greedy with ties broken towards the lowest
/// action index; for λ > 0 it is the Gibbs policy `π ∝ exp(-Q/λ)` and the
/// value is the soft minimum `-λ ln Σ exp(-Q/λ)`.
pub fn best_response_dp(model: &ModelSpec, aggregates: &AggregateProfile, lambda: f64) -> Result<(PolicyProfile, ValueTables)> {
    check_lambda(lambda)?;
    let dims = model.dims();
    aggregates.check_dims(dims)?;
    let actions = dims.actions;
    type BlockTables = (Vec<f64>, Vec<f64>, Vec<f64>);
    let blocks: Vec<Result<BlockTables>> = Execution::default().map_range(dims.blocks, |b| {
        let mut pi = vec![0.0; dims.horizon * dims.states * actions];
        let (q, v) = backward_block(model, aggregates, b, |h, s, q_row| {
            let out = &mut pi[(h * dims.states + s) * actions..(h * dims.states + s + 1) * actions];
            respond(q_row, lambda, out)
        })?;
        Ok((pi, q, v))
    });
    let mut policy = PolicyProfile::uniform(dims);
    let mut tables = Vec::with_capacity(dims.blocks);
    for (chunk, block) in policy.blocks_mut().into_iter().zip(blocks) {
        let (pi, q, v) = block?;
        chunk.copy_from_slice(&pi);
        tables.push((q, v));
    }
    Ok((policy, ValueTables::from_blocks(dims, lambda, tables)))
}

/// Fills `out` with the (soft) best response to `q` and returns its value.
pub(crate) fn respond(q: &[f64], lambda: f64, out: &mut [f64]) -> f64 {
    let (best, min_q) = q
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(i, m), (j, &x)| if x < m { (j, x) } else { (i, m) });
    if lambda == 0.0 {
        out.fill(0.0);
        out[best] = 1.0;
        return min_q;
    }
    let mut total = 0.0;
    for (o, &x) in out.iter_mut().zip(q) {
        *o = (-(x - min_q) / lambda).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
    min_q - lambda * total.ln()
}

/// `J^{λ,b} = ⟨μ1^b, V^λ[b][0]⟩` for `policy` against the aggregates of
/// `flow` (which may come from a different profile).
pub fn policy_return(model: &ModelSpec, policy: &PolicyProfile, flow: &FlowProfile, lambda: f64) -> Result<Vec<f64>> {
    let dims = model.dims();
    flow.check_dims(dims)?;
    let agg = compute_aggregates(flow, model.graphon(), model.grid())?;
    let tables = regularized_value_iteration(model, policy, &agg, lambda)?;
    Ok(block_returns(model, &tables))
}

pub(crate) fn block_returns(model: &ModelSpec, tables: &ValueTables) -> Vec<f64> {
    (0..model.blocks())
        .map(|b| model.initial(b).iter().zip(tables.v(b, 0)).map(|(m, v)| m * v).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::flow::induce_flow;
    use crate::model::{GraphonSpec, PopulationGrid, TabularDynamics};

    fn one_step(costs: Vec<f64>, actions: usize) -> ModelSpec {
        let d = TabularDynamics::new(1, 1, actions, costs, vec![1.0; actions]).unwrap();
        ModelSpec::new(1, 1, actions, PopulationGrid::uniform(1).unwrap(), GraphonSpec::complete(1).unwrap(), vec![vec![1.0]], Arc::new(d)).unwrap()
    }

    #[test]
    fn one_step_unregularized_value_is_expected_cost() {
        let m = one_step(vec![0.3, 0.7], 2);
        let p = PolicyProfile::from_fn(m.dims(), |_, _, _| vec![0.25, 0.75]).unwrap();
        let (_, agg) = induce_flow(&m, &p).unwrap();
        let t = regularized_value_iteration(&m, &p, &agg, 0.0).unwrap();
        assert_eq!(t.q(0, 0, 0), &[0.3, 0.7]);
        assert!((t.v(0, 0)[0] - (0.25 * 0.3 + 0.75 * 0.7)).abs() < 1e-15);
        assert_eq!(t.v(0, 1), &[0.0]);
    }

    #[test]
    fn entropy_only_value() {
        let m = one_step(vec![0.0, 0.0], 2);
        let p = PolicyProfile::uniform(m.dims());
        let (_, agg) = induce_flow(&m, &p).unwrap();
        let t = regularized_value_iteration(&m, &p, &agg, 1.0).unwrap();
        assert!((t.v(0, 0)[0] - 0.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn negative_lambda_is_rejected() {
        let m = one_step(vec![0.0], 1);
        let p = PolicyProfile::uniform(m.dims());
        let (_, agg) = induce_flow(&m, &p).unwrap();
        assert!(matches!(regularized_value_iteration(&m, &p, &agg, -0.1), Err(GmfgError::InvalidRegularization(_))));
        assert!(matches!(best_response_dp(&m, &agg, -1.0), Err(GmfgError::InvalidRegularization(_))));
    }

    #[test]
    fn greedy_best_response_one_step() {
        let m = one_step(vec![0.3, 0.7], 2);
        let (_, agg) = induce_flow(&m, &PolicyProfile::uniform(m.dims())).unwrap();
        let (pi, t) = best_response_dp(&m, &agg, 0.0).unwrap();
        assert_eq!(pi.row(0, 0, 0), &[1.0, 0.0]);
        assert_eq!(t.v(0, 0)[0], 0.3);
    }

    #[test]
    fn greedy_tie_breaks_to_lowest_index() {
        let m = one_step(vec![0.4, 0.2, 0.2], 3);
        let (_, agg) = induce_flow(&m, &PolicyProfile::uniform(m.dims())).unwrap();
        let (pi, _) = best_response_dp(&m, &agg, 0.0).unwrap();
        assert_eq!(pi.row(0, 0, 0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn soft_best_response_symmetric_row() {
        let mut out = [0.0; 2];
        let v = respond(&[0.0, 0.0], 1.0, &mut out);
        assert!((v + 2f64.ln()).abs() < 1e-15);
        assert_eq!(out, [0.5, 0.5]);
    }

    #[test]
    fn soft_min_survives_large_costs() {
        let mut out = [0.0; 3];
        let v = respond(&[1000.0, 1000.5, 2000.0], 1e-3, &mut out);
        assert!(v.is_finite());
        assert!((v - 1000.0).abs() < 1e-6);
        assert!((out[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn soft_response_value_matches_its_own_evaluation() {
        let q = [0.2, 0.9, 0.5, 0.1];
        let lambda = 0.3;
        let mut pi = [0.0; 4];
        let v = respond(&q, lambda, &mut pi);
        let eval: f64 = pi.iter().zip(&q).map(|(p, q)| p * q + lambda * entropy_term(*p)).sum();
        assert!((v - eval).abs() < 1e-14);
    }

    #[test]
    fn zero_cost_return_is_zero() {
        let m = one_step(vec![0.0, 0.0], 2);
        let p = PolicyProfile::uniform(m.dims());
        let (flow, _) = induce_flow(&m, &p).unwrap();
        assert_eq!(policy_return(&m, &p, &flow, 0.0).unwrap(), vec![0.0]);
    }
}
