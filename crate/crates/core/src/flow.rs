//! Mean-field flow induction and graphon aggregates.

use crate::error::{GmfgError, Result};
use crate::exec::Execution;
use crate::model::{GraphonSpec, ModelSpec, PopulationGrid};
use crate::tables::{AggregateProfile, FlowProfile, PolicyProfile};

/// `z[b][h] = Σ_{b'} W_h[b,b'] ν_{b'} μ[b'][h]` for every block and step.
pub fn compute_aggregates(flow: &FlowProfile, graphon: &GraphonSpec, grid: &PopulationGrid) -> Result<AggregateProfile> {
    if flow.blocks() != grid.blocks() || graphon.blocks() != grid.blocks() {
        return Err(GmfgError::Dimension(format!(
            "flow has {} blocks, graphon {}, population grid {}",
            flow.blocks(),
            graphon.blocks(),
            grid.blocks()
        )));
    }
    if graphon.step_count() != 1 && graphon.step_count() < flow.horizon() {
        return Err(GmfgError::Dimension(format!(
            "graphon covers {} steps, flow has {}",
            graphon.step_count(),
            flow.horizon()
        )));
    }
    let mut agg = AggregateProfile::zeros(flow.blocks(), flow.horizon(), flow.states());
    for h in 0..flow.horizon() {
        fill_step(&mut agg, flow, graphon, grid, h);
    }
    Ok(agg)
}

fn fill_step(agg: &mut AggregateProfile, flow: &FlowProfile, graphon: &GraphonSpec, grid: &PopulationGrid, h: usize) {
    let blocks = flow.blocks();
    let states = flow.states();
    for b in 0..blocks {
        let (total, components) = agg.step_mut(b, h);
        total.fill(0.0);
        for src in 0..blocks {
            let scale = graphon.weight(h, b, src) * grid.weight(src);
            let comp = &mut components[src * states..(src + 1) * states];
            for ((c, t), m) in comp.iter_mut().zip(total.iter_mut()).zip(flow.at(src, h)) {
                *c = scale * m;
                *t += *c;
            }
        }
    }
}

/// Forward recursion for the flow induced by `policy`, with the aggregate
/// at each step built from the flow at that same step.
pub fn induce_flow(model: &ModelSpec, policy: &PolicyProfile) -> Result<(FlowProfile, AggregateProfile)> {
    induce_flow_with(Execution::default(), model, policy)
}

pub fn induce_flow_with(exec: Execution, model: &ModelSpec, policy: &PolicyProfile) -> Result<(FlowProfile, AggregateProfile)> {
    let dims = model.dims();
    policy.check_dims(dims)?;
    let (blocks, horizon, states) = (dims.blocks, dims.horizon, dims.states);
    let mut flow = FlowProfile::zeros(blocks, horizon, states);
    let mut agg = AggregateProfile::zeros(blocks, horizon, states);
    for b in 0..blocks {
        flow.at_mut(b, 0).copy_from_slice(model.initial(b));
    }
    for h in 0..horizon {
        fill_step(&mut agg, &flow, model.graphon(), model.grid(), h);
        if h + 1 == horizon {
            break;
        }
        let next: Vec<Result<Vec<f64>>> = exec.map_range(blocks, |b| {
            let ctx = agg.context(b, h);
            let mut out = vec![0.0; states];
            let mut row = vec![0.0; states];
            for (s, &m) in flow.at(b, h).iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                let pi = policy.row(b, h, s);
                for (a, &p) in pi.iter().enumerate() {
                    let w = m * p;
                    if w == 0.0 {
                        continue;
                    }
                    model.checked_transition(&ctx, s, a, &mut row)?;
                    for (o, p) in out.iter_mut().zip(&row) {
                        *o += w * p;
                    }
                }
            }
            Ok(out)
        });
        for (b, mu) in next.into_iter().enumerate() {
            flow.at_mut(b, h + 1).copy_from_slice(&mu?);
        }
    }
    Ok((flow, agg))
}
