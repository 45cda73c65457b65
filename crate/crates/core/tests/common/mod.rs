//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls into the solver code paths it checks: values come
//! from expanding every continuation of a trajectory, best responses from
//! listing every deterministic policy, the prox step from Newton's method
//! on the simplex and ridge estimates from Gaussian elimination.

#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use gmfg_core::{AggregateProfile, Dims, Dynamics, GraphonSpec, ModelSpec, PolicyProfile, PopulationGrid, StepContext};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random point of the simplex, every entry at least `floor / n`.
pub fn simplex<R: Rng>(rng: &mut R, n: usize, floor: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| (1.0 - floor) * x / total + floor / n as f64).collect()
}

/// Random rules whose costs and transitions both move with the aggregate.
pub struct RandomDynamics {
    states: usize,
    actions: usize,
    base_cost: Vec<f64>,
    crowd_share: f64,
    calm: Vec<f64>,
    crowded: Vec<f64>,
}

impl Dynamics for RandomDynamics {
    fn cost(&self, ctx: &StepContext<'_>, state: usize, action: usize) -> f64 {
        let i = (ctx.step * self.states + state) * self.actions + action;
        let z = ctx.aggregate[(state + action) % self.states].clamp(0.0, 1.0);
        (1.0 - self.crowd_share) * self.base_cost[i] + self.crowd_share * z
    }

    fn transition(&self, ctx: &StepContext<'_>, state: usize, action: usize, out: &mut [f64]) {
        let start = ((ctx.step * self.states + state) * self.actions + action) * self.states;
        let w = ctx.aggregate[state].clamp(0.0, 1.0);
        for (k, o) in out.iter_mut().enumerate() {
            *o = (1.0 - w) * self.calm[start + k] + w * self.crowded[start + k];
        }
    }
}

pub fn random_model<R: Rng>(rng: &mut R, blocks: usize, horizon: usize, states: usize, actions: usize) -> ModelSpec {
    let rows = horizon * states * actions;
    let kernel = |rng: &mut R| (0..rows).flat_map(|_| simplex(rng, states, 0.0)).collect::<Vec<_>>();
    let dynamics = RandomDynamics {
        states,
        actions,
        base_cost: (0..rows).map(|_| rng.random()).collect(),
        crowd_share: rng.random(),
        calm: kernel(rng),
        crowded: kernel(rng),
    };
    let mut matrix = vec![0.0; blocks * blocks];
    for i in 0..blocks {
        for j in i..blocks {
            let w: f64 = rng.random();
            matrix[i * blocks + j] = w;
            matrix[j * blocks + i] = w;
        }
    }
    let grid = PopulationGrid::new(simplex(rng, blocks, 0.2)).unwrap();
    let graphon = GraphonSpec::new(blocks, matrix).unwrap();
    let initial = (0..blocks).map(|_| simplex(rng, states, 0.0)).collect();
    ModelSpec::new(horizon, states, actions, grid, graphon, initial, Arc::new(dynamics)).unwrap()
}

/// Every `(H, S, A)` with `S·A·H ≤ 12`.
pub fn small_shapes() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for h in 1..=12 {
        for s in 1..=12 {
            for a in 1..=12 {
                if h * s * a <= 12 {
                    out.push((h, s, a));
                }
            }
        }
    }
    out
}

pub fn random_policy<R: Rng>(rng: &mut R, dims: Dims, floor: f64) -> PolicyProfile {
    PolicyProfile::from_fn(dims, |_, _, _| simplex(rng, dims.actions, floor)).unwrap()
}

/// Expected regularized cost-to-go from `(h, s)`, expanding the full tree
/// of actions and successor states.
pub fn enumerate_value(model: &ModelSpec, policy: &PolicyProfile, agg: &AggregateProfile, lambda: f64, b: usize, h: usize, s: usize) -> f64 {
    if h == model.horizon() {
        return 0.0;
    }
    let mut total = 0.0;
    for (a, &p) in policy.row(b, h, s).iter().enumerate() {
        if p > 0.0 {
            total += p * (enumerate_q(model, policy, agg, lambda, b, h, s, a) + lambda * p.ln());
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
pub fn enumerate_q(model: &ModelSpec, policy: &PolicyProfile, agg: &AggregateProfile, lambda: f64, b: usize, h: usize, s: usize, a: usize) -> f64 {
    let ctx = agg.context(b, h);
    let mut next = vec![0.0; model.states()];
    model.transition(&ctx, s, a, &mut next);
    let mut total = model.cost(&ctx, s, a);
    for (s2, &p) in next.iter().enumerate() {
        if p > 0.0 {
            total += p * enumerate_value(model, policy, agg, lambda, b, h + 1, s2);
        }
    }
    total
}

/// `Σ_s μ_1(s) V_1(s)` for block `b` by enumeration.
pub fn enumerate_return(model: &ModelSpec, policy: &PolicyProfile, agg: &AggregateProfile, lambda: f64, b: usize) -> f64 {
    model.initial(b).iter().enumerate().map(|(s, &m)| m * enumerate_value(model, policy, agg, lambda, b, 0, s)).sum()
}

fn deterministic_value(model: &ModelSpec, agg: &AggregateProfile, b: usize, choice: &[usize], h: usize, s: usize) -> f64 {
    if h == model.horizon() {
        return 0.0;
    }
    let a = choice[h * model.states() + s];
    let ctx = agg.context(b, h);
    let mut next = vec![0.0; model.states()];
    model.transition(&ctx, s, a, &mut next);
    let tail: f64 = next.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(s2, p)| p * deterministic_value(model, agg, b, choice, h + 1, s2)).sum();
    model.cost(&ctx, s, a) + tail
}

/// Smallest unregularized return of block `b` over all `A^{H·S}`
/// deterministic Markov policies against fixed aggregates.
pub fn exhaustive_best_return(model: &ModelSpec, agg: &AggregateProfile, b: usize) -> f64 {
    let slots = model.horizon() * model.states();
    let actions = model.actions();
    let mut choice = vec![0usize; slots];
    let mut best = f64::INFINITY;
    loop {
        let j: f64 = model.initial(b).iter().enumerate().map(|(s, &m)| m * deterministic_value(model, agg, b, &choice, 0, s)).sum();
        best = best.min(j);
        let mut i = 0;
        while i < slots {
            choice[i] += 1;
            if choice[i] < actions {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == slots {
            return best;
        }
    }
}

/// Minimiser of `η⟨g + λ ln π₀, p⟩ + KL(p ‖ π₀)` over the simplex by damped
/// Newton steps in the coordinates `p_1..p_{A-1}`.
pub fn prox_oracle(row: &[f64], g: &[f64], eta: f64, lambda: f64) -> Vec<f64> {
    let n = row.len();
    let lin: Vec<f64> = g.iter().zip(row).map(|(g, r)| eta * (g + lambda * r.ln())).collect();
    let objective = |p: &[f64]| -> f64 { p.iter().zip(&lin).zip(row).map(|((p, l), r)| l * p + p * (p / r).ln()).sum() };
    let mut p = vec![1.0 / n as f64; n];
    if n == 1 {
        return p;
    }
    let last = n - 1;
    for _ in 0..200 {
        // Reduced gradient and Hessian with p_last = 1 - Σ p_i.
        let d = |i: usize| lin[i] + (p[i] / row[i]).ln() + 1.0;
        let grad: Vec<f64> = (0..last).map(|i| d(i) - d(last)).collect();
        if grad.iter().map(|x| x.abs()).fold(0.0, f64::max) < 1e-14 {
            break;
        }
        let hess: Vec<Vec<f64>> =
            (0..last).map(|i| (0..last).map(|j| if i == j { 1.0 / p[i] } else { 0.0 } + 1.0 / p[last]).collect()).collect();
        let step = solve_dense(hess, grad.iter().map(|x| vec![-x]).collect());
        let dir: Vec<f64> = step.iter().map(|r| r[0]).collect();
        let dir_last = -dir.iter().sum::<f64>();
        let f0 = objective(&p);
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = (0..n).map(|i| p[i] + t * if i == last { dir_last } else { dir[i] }).collect();
            if cand.iter().all(|x| *x > 0.0) && objective(&cand) <= f0 + 1e-4 * t * slope {
                p = cand;
                break;
            }
            t *= 0.5;
            if t < 1e-20 {
                return p;
            }
        }
    }
    p
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            for c in 0..b[r].len() {
                b[r][c] -= f * b[col][c];
            }
        }
    }
    let m = b.first().map_or(0, Vec::len);
    let mut x = vec![vec![0.0; m]; n];
    for r in (0..n).rev() {
        for c in 0..m {
            let tail: f64 = (r + 1..n).map(|k| a[r][k] * x[k][c]).sum();
            x[r][c] = (b[r][c] - tail) / a[r][r];
        }
    }
    x
}

pub fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// `θ̂ = argmin Σ_j ‖θ φ_j - e_{s_j}‖² + ‖θ‖²_F` from the normal equations
/// `(I + Σ φφᵀ) θᵀ = Σ φ e_{s}ᵀ`. Returned as `S` rows of length `d`.
pub fn ridge_normal_equations(samples: &[(Vec<f64>, usize)], states: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut gram: Vec<Vec<f64>> = (0..dim).map(|i| (0..dim).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    let mut rhs = vec![vec![0.0; states]; dim];
    for (phi, s) in samples {
        for i in 0..dim {
            for j in 0..dim {
                gram[i][j] += phi[i] * phi[j];
            }
            rhs[i][*s] += phi[i];
        }
    }
    let theta_t = solve_dense(gram, rhs);
    (0..states).map(|s| (0..dim).map(|j| theta_t[j][s]).collect()).collect()
}
