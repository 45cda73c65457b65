//! Discrete-time graphon mean-field games on block-discretized populations.
//!
//! The crate is organised around a [`ModelSpec`] describing the game and a
//! handful of exact computations on it (flow induction, aggregates,
//! regularized policy evaluation and best responses). Solvers built on top
//! of those computations live in [`solvers`], sample-based estimators in
//! [`estimators`], benchmark games in [`environments`] and convergence
//! measures in [`metrics`].
//!
//! With the default `parallel` feature, per-block work inside one iteration
//! and independent evaluations (Monte Carlo, probes) fan out over rayon.
//! Without it every loop runs sequentially with identical results.

pub mod environments;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod flow;
pub mod metrics;
pub mod model;
pub mod schedule;
pub mod simulate;
pub mod solvers;
pub mod tables;
pub mod values;

pub use error::{GmfgError, Result};
pub use exec::Execution;
pub use flow::{compute_aggregates, induce_flow};
pub use model::{Dims, Dynamics, GraphonSpec, ModelSpec, PopulationGrid, StepContext};
pub use schedule::{ScheduleRule, Schedules};
pub use simulate::{sample_trajectory, TransitionSample};
pub use tables::{AggregateProfile, FlowProfile, PolicyProfile, ValueTables};
pub use values::{best_response_dp, policy_return, regularized_value_iteration};
