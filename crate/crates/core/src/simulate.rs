//! Episode sampling against a fixed mean field.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GmfgError, Result};
use crate::exec::Execution;
use crate::model::ModelSpec;
use crate::tables::{AggregateProfile, PolicyProfile};

/// One observed step `(h, s_h, a_h, c_h, s_{h+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionSample {
    pub step: usize,
    pub state: usize,
    pub action: usize,
    pub cost: f64,
    pub next_state: usize,
}

/// Inverse-CDF draw from a probability vector. Falls back to the last
/// positive entry when rounding leaves `u` past the cumulative sum.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Samples one length-`H` episode for a representative agent of `block`.
pub fn sample_trajectory<R: Rng + ?Sized>(
    model: &ModelSpec,
    policy: &PolicyProfile,
    block: usize,
    aggregates: &AggregateProfile,
    rng: &mut R,
) -> Result<Vec<TransitionSample>> {
    let dims = model.dims();
    policy.check_dims(dims)?;
    aggregates.check_dims(dims)?;
    if block >= dims.blocks {
        return Err(GmfgError::Dimension(format!("block {block} out of range for {} blocks", dims.blocks)));
    }
    let mut row = vec![0.0; dims.states];
    let mut state = sample_index(model.initial(block), rng.random());
    let mut out = Vec::with_capacity(dims.horizon);
    for h in 0..dims.horizon {
        let ctx = aggregates.context(block, h);
        let action = sample_index(policy.row(block, h, state), rng.random());
        let cost = model.checked_cost(&ctx, state, action)?;
        model.checked_transition(&ctx, state, action, &mut row)?;
        let next_state = sample_index(&row, rng.random());
        out.push(TransitionSample { step: h, state, action, cost, next_state });
        state = next_state;
    }
    Ok(out)
}

/// Mean and standard error of the sampled regularized return
/// `Σ_h c_h + λ ln π(a_h|s_h)` over `episodes` episodes.
///
/// Episodes are split into fixed chunks, each with its own ChaCha stream,
/// so the estimate does not depend on the execution mode.
#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_return(
    exec: Execution,
    model: &ModelSpec,
    policy: &PolicyProfile,
    block: usize,
    aggregates: &AggregateProfile,
    lambda: f64,
    episodes: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    const CHUNK: usize = 1024;
    let chunks = episodes.div_ceil(CHUNK);
    let partial: Vec<Result<(f64, f64)>> = exec.map_range(chunks, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let n = CHUNK.min(episodes - i * CHUNK);
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let traj = sample_trajectory(model, policy, block, aggregates, &mut rng)?;
            let g: f64 = traj
                .iter()
                .map(|t| {
                    let p = policy.row(block, t.step, t.state)[t.action];
                    t.cost + if lambda > 0.0 { lambda * p.ln() } else { 0.0 }
                })
                .sum();
            sum += g;
            sq += g * g;
        }
        Ok((sum, sq))
    });
    let (mut sum, mut sq) = (0.0, 0.0);
    for p in partial {
        let (s, q) = p?;
        sum += s;
        sq += q;
    }
    let n = episodes as f64;
    let mean = sum / n;
    let var = (sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    Ok((mean, (var / n).sqrt()))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::flow::induce_flow;
    use crate::model::{GraphonSpec, PopulationGrid, TabularDynamics};

    fn cycle_model(horizon: usize) -> ModelSpec {
        let states = 3;
        let mut t = vec![0.0; horizon * states * states];
        for h in 0..horizon {
            for s in 0..states {
                t[(h * states + s) * states + (s + 1) % states] = 1.0;
            }
        }
        let costs = (0..horizon * states).map(|i| (i % 5) as f64 / 4.0).collect();
        let d = TabularDynamics::new(horizon, states, 1, costs, t).unwrap();
        ModelSpec::new(horizon, states, 1, PopulationGrid::uniform(1).unwrap(), GraphonSpec::complete(1).unwrap(), vec![vec![0.0, 1.0, 0.0]], Arc::new(d)).unwrap()
    }

    #[test]
    fn sample_index_respects_zeros() {
        assert_eq!(sample_index(&[0.0, 1.0, 0.0], 0.0), 1);
        assert_eq!(sample_index(&[0.5, 0.5, 0.0], 0.999_999_999_999_999_9), 1);
        assert_eq!(sample_index(&[0.25, 0.25, 0.5], 0.3), 1);
    }

    #[test]
    fn deterministic_model_gives_fixed_path() {
        let m = cycle_model(4);
        let p = PolicyProfile::uniform(m.dims());
        let (_, agg) = induce_flow(&m, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let first = sample_trajectory(&m, &p, 0, &agg, &mut rng).unwrap();
        for _ in 0..10 {
            assert_eq!(sample_trajectory(&m, &p, 0, &agg, &mut rng).unwrap(), first);
        }
        let states: Vec<usize> = first.iter().map(|t| t.state).collect();
        assert_eq!(states, vec![1, 2, 0, 1]);
        assert_eq!(first.len(), 4);
        assert!(first.iter().all(|t| (0.0..=1.0).contains(&t.cost)));
    }

    #[test]
    fn out_of_range_block_is_rejected() {
        let m = cycle_model(2);
        let p = PolicyProfile::uniform(m.dims());
        let (_, agg) = induce_flow(&m, &p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(sample_trajectory(&m, &p, 1, &agg, &mut rng), Err(GmfgError::Dimension(_))));
    }

    #[test]
    fn monte_carlo_is_mode_independent() {
        let m = cycle_model(3);
        let p = PolicyProfile::uniform(m.dims());
        let (_, agg) = induce_flow(&m, &p).unwrap();
        let a = monte_carlo_return(Execution::Sequential, &m, &p, 0, &agg, 0.0, 3000, 9).unwrap();
        let b = monte_carlo_return(Execution::Parallel, &m, &p, 0, &agg, 0.0, 3000, 9).unwrap();
        assert_eq!(a, b);
    }
}
