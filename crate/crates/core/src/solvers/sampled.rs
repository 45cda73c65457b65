//! Mirror descent from sampled episodes: the tabular bandit solver, the
//! linear-GMFG solver and an exact-payoff variant used as a control.
//!
//! The mean field is computed exactly each iteration; only the
//! representative agents' episodes are random. Every block owns a ChaCha
//! stream, so per-block work can run in parallel without changing results.

use nalgebra::DMatrix;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{GmfgError, Result};
use crate::estimators::{bandit_value_update, ix_gradient, BanditValueState, LinearModelSpec, RidgeState};
use crate::flow::induce_flow_with;
use crate::model::ModelSpec;
use crate::simulate::{sample_trajectory, TransitionSample};
use crate::tables::{AggregateProfile, PolicyProfile, ValueTables};
use crate::values::{entropy_term, regularized_value_iteration_with};

use super::omd::mirror_descent_in_place;
use super::record::{RunState, SolverConfig, SolverOutput};

/// Tabular bandit mirror descent: running value estimates along the
/// realised trajectory and IX gradients at the visited rows.
pub fn solve_bandit(model: &ModelSpec, config: &SolverConfig) -> Result<SolverOutput> {
    run_sampled(model, config, Payoff::BanditValues)
}

/// Same sampling and update rule as [`solve_bandit`], but the IX payoff is
/// the exact `Q^λ(π_t, μ^{π_t})` of the taken action.
pub fn solve_bandit_exact_q(model: &ModelSpec, config: &SolverConfig) -> Result<SolverOutput> {
    run_sampled(model, config, Payoff::ExactQ)
}

/// Linear-GMFG mirror descent. `θ̂_h` is refit each iteration from all
/// transitions observed in earlier iterations; the cost is known.
pub fn solve_linear(model: &ModelSpec, linear: &LinearModelSpec, config: &SolverConfig) -> Result<SolverOutput> {
    run_sampled(model, config, Payoff::Linear { spec: linear, fixed_truth: false })
}

/// [`solve_linear`] with `θ̂` pinned to the ground-truth parameters.
pub fn solve_linear_with_truth(model: &ModelSpec, linear: &LinearModelSpec, config: &SolverConfig) -> Result<SolverOutput> {
    if linear.truth().is_none() {
        return Err(GmfgError::InvalidParams("linear model has no ground-truth parameters".into()));
    }
    run_sampled(model, config, Payoff::Linear { spec: linear, fixed_truth: true })
}

#[derive(Clone, Copy)]
enum Payoff<'a> {
    BanditValues,
    ExactQ,
    Linear { spec: &'a LinearModelSpec, fixed_truth: bool },
}

struct BlockState {
    rng: ChaCha8Rng,
    values: BanditValueState,
    observed: Vec<TransitionSample>,
}

/// Read-only inputs shared by all blocks within one iteration.
struct Round<'a> {
    model: &'a ModelSpec,
    config: &'a SolverConfig,
    payoff: Payoff<'a>,
    policy: &'a PolicyProfile,
    aggregates: &'a AggregateProfile,
    exact: Option<&'a ValueTables>,
    thetas: Option<&'a [DMatrix<f64>]>,
    eta: f64,
    gamma: f64,
}

fn run_sampled(model: &ModelSpec, config: &SolverConfig, payoff: Payoff<'_>) -> Result<SolverOutput> {
    config.validate(model)?;
    let dims = model.dims();
    let exec = config.execution;
    let mut ridge = match payoff {
        Payoff::Linear { spec, .. } => {
            spec.check_model(model)?;
            Some(RidgeState::new(dims.horizon, dims.states, spec.dim()))
        }
        _ => None,
    };
    let mut blocks: Vec<BlockState> = (0..dims.blocks)
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(b as u64);
            BlockState { rng, values: BanditValueState::new(1, dims.horizon, dims.states, dims.actions), observed: Vec::new() }
        })
        .collect();
    let mut run = RunState::new(PolicyProfile::uniform(dims));
    for t in 1..=config.iterations {
        let eta = config.schedules.learning_rate.value(t, dims.horizon);
        let gamma = config.schedules.exploration.value(t, dims.horizon);
        if gamma.is_nan() || gamma <= 0.0 {
            return Err(GmfgError::InvalidSchedule(format!("sampled gradients need positive exploration, got {gamma} at t = {t}")));
        }
        let (_, agg) = induce_flow_with(exec, model, &run.policy)?;
        let snapshot = run.policy.clone();
        let exact = match payoff {
            Payoff::ExactQ => Some(regularized_value_iteration_with(exec, model, &snapshot, &agg, config.lambda)?),
            _ => None,
        };
        let thetas: Option<Vec<DMatrix<f64>>> = match payoff {
            Payoff::Linear { spec, fixed_truth: true } => spec.truth().map(<[_]>::to_vec),
            Payoff::Linear { .. } => ridge.as_ref().map(|r| (0..dims.horizon).map(|h| r.solve(h)).collect()),
            _ => None,
        };
        let round = Round {
            model,
            config,
            payoff,
            policy: &snapshot,
            aggregates: &agg,
            exact: exact.as_ref(),
            thetas: thetas.as_deref(),
            eta,
            gamma,
        };
        let mut work: Vec<(usize, &mut [f64], &mut BlockState)> =
            run.policy.blocks_mut().into_iter().zip(blocks.iter_mut()).enumerate().map(|(b, (c, s))| (b, c, s)).collect();
        exec.try_for_each_mut(&mut work, |(b, chunk, state)| block_round(&round, *b, chunk, state))?;
        drop(work);
        if let (Payoff::Linear { spec, fixed_truth: false }, Some(ridge)) = (payoff, ridge.as_mut()) {
            let mut phi = vec![0.0; spec.dim()];
            for (b, state) in blocks.iter().enumerate() {
                for step in &state.observed {
                    spec.features(step.state, step.action, agg.at(b, step.step), &mut phi);
                    ridge.update(step.step, &phi, step.next_state)?;
                }
            }
        }
        run.finish_iteration(model, config, t)?;
    }
    let mut out = run.into_output();
    out.ridge = ridge;
    Ok(out)
}

fn block_round(round: &Round<'_>, b: usize, chunk: &mut [f64], state: &mut BlockState) -> Result<()> {
    let dims = round.model.dims();
    let (states, actions) = (dims.states, dims.actions);
    let lambda = round.config.lambda;
    let linear_q = match round.payoff {
        Payoff::Linear { spec, .. } => Some(linear_q_table(round, spec, b)?),
        _ => None,
    };
    let mut grad = vec![0.0; chunk.len()];
    let mut visits = vec![0u32; dims.horizon * states];
    state.observed.clear();
    for _ in 0..round.config.episodes_per_iteration {
        let episode = sample_trajectory(round.model, round.policy, b, round.aggregates, &mut state.rng)?;
        for step in episode.iter().rev() {
            let (h, s, a) = (step.step, step.state, step.action);
            let row = round.policy.row(b, h, s);
            let payoff = match round.payoff {
                Payoff::BanditValues => {
                    let values = &mut state.values;
                    values.register_visit(0, h, s);
                    let v_next = values.value(0, h + 1, step.next_state);
                    let target = step.cost + lambda * row[a].ln() + v_next;
                    bandit_value_update(values, 0, h, s, target, lambda, &round.config.schedules.value_step)?;
                    step.cost + v_next
                }
                Payoff::ExactQ => round.exact.expect("exact tables computed for this payoff").q(b, h, s)[a],
                Payoff::Linear { .. } => linear_q.as_ref().expect("linear table computed for this payoff")[(h * states + s) * actions + a],
            };
            let g = ix_gradient(row, a, payoff, round.gamma)?;
            let at = (h * states + s) * actions;
            grad[at..at + actions].iter_mut().zip(&g).for_each(|(acc, x)| *acc += x);
            visits[h * states + s] += 1;
        }
        state.observed.extend(episode);
    }
    for (i, &n) in visits.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let g = &mut grad[i * actions..(i + 1) * actions];
        if n > 1 {
            g.iter_mut().for_each(|x| *x /= n as f64);
        }
        mirror_descent_in_place(&mut chunk[i * actions..(i + 1) * actions], g, round.eta, lambda)?;
    }
    Ok(())
}

/// Backward pass with the fitted transition model:
/// `Q̂_h(s, a) = c + φ(s, a, z)ᵀ θ̂_hᵀ V̂_{h+1}`, clipped into the value range,
/// and `V̂_h(s) = Σ_a π(a|s) (Q̂_h(s, a) + λ ln π(a|s))`.
fn linear_q_table(round: &Round<'_>, spec: &LinearModelSpec, b: usize) -> Result<Vec<f64>> {
    let dims = round.model.dims();
    let (horizon, states, actions) = (dims.horizon, dims.states, dims.actions);
    let thetas = round.thetas.expect("parameters available for the linear payoff");
    let lambda = round.config.lambda;
    let ln_a = (actions as f64).ln();
    let mut q = vec![0.0; horizon * states * actions];
    let mut v_next = vec![0.0; states];
    let mut v_here = vec![0.0; states];
    let mut phi = vec![0.0; spec.dim()];
    for h in (0..horizon).rev() {
        let ctx = round.aggregates.context(b, h);
        let projected: Vec<f64> = (0..spec.dim()).map(|j| thetas[h].column(j).iter().zip(&v_next).map(|(t, v)| t * v).sum()).collect();
        let remaining = (horizon - h) as f64;
        let (lo, hi) = (-lambda * (remaining - 1.0) * ln_a, remaining);
        for s in 0..states {
            let pi = round.policy.row(b, h, s);
            let mut v = 0.0;
            for a in 0..actions {
                spec.features(s, a, ctx.aggregate, &mut phi);
                let expected: f64 = phi.iter().zip(&projected).map(|(f, w)| f * w).sum();
                let q_sa = (round.model.checked_cost(&ctx, s, a)? + expected).clamp(lo, hi);
                q[(h * states + s) * actions + a] = q_sa;
                v += pi[a] * q_sa + lambda * entropy_term(pi[a]);
            }
            v_here[s] = v;
        }
        std::mem::swap(&mut v_next, &mut v_here);
    }
    Ok(q)
}
