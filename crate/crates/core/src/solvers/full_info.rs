use crate::error::Result;
use crate::flow::induce_flow_with;
use crate::model::ModelSpec;
use crate::tables::PolicyProfile;
use crate::values::regularized_value_iteration_with;

use super::omd::mirror_descent_in_place;
use super::record::{RunState, SolverConfig, SolverOutput};

/// Mirror descent with exact gradients: each iteration evaluates
/// `Q^λ(π_t, μ^{π_t})` and updates every `(b, h, s)` row against it.
pub fn solve_full_info(model: &ModelSpec, config: &SolverConfig) -> Result<SolverOutput> {
    config.validate(model)?;
    let dims = model.dims();
    let exec = config.execution;
    let mut run = RunState::new(PolicyProfile::uniform(dims));
    for t in 1..=config.iterations {
        let eta = config.schedules.learning_rate.value(t, dims.horizon);
        let (_, agg) = induce_flow_with(exec, model, &run.policy)?;
        let tables = regularized_value_iteration_with(exec, model, &run.policy, &agg, config.lambda)?;
        let mut chunks: Vec<(usize, &mut [f64])> = run.policy.blocks_mut().into_iter().enumerate().collect();
        exec.try_for_each_mut(&mut chunks, |(b, chunk)| {
            for (i, row) in chunk.chunks_mut(dims.actions).enumerate() {
                let (h, s) = (i / dims.states, i % dims.states);
                mirror_descent_in_place(row, tables.q(*b, h, s), eta, config.lambda)?;
            }
            Ok(())
        })?;
        run.finish_iteration(model, config, t)?;
    }
    Ok(run.into_output())
}
