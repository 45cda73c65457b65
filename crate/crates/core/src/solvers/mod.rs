//! Equilibrium-seeking loops. Each returns the final policy and the
//! recorded metric stream.

mod fictitious;
mod full_info;
mod omd;
mod record;
mod sampled;

pub use fictitious::{running_average, solve_fictitious_play};
pub use full_info::solve_full_info;
pub use omd::{mirror_descent_in_place, mirror_descent_step};
pub use record::{RunRecord, RunState, SolverConfig, SolverOutput};
pub use sampled::{solve_bandit, solve_bandit_exact_q, solve_linear, solve_linear_with_truth};
