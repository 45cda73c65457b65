use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{GmfgError, Result};
use crate::estimators::RidgeState;
use crate::exec::Execution;
use crate::metrics::{exploitability, kl_metric, ReferenceSolution};
use crate::model::ModelSpec;
use crate::schedule::Schedules;
use crate::tables::{FlowProfile, PolicyProfile};
use crate::values::check_lambda;

/// Inputs shared by every solver loop.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub lambda: f64,
    pub schedules: Schedules,
    /// Number of policy updates `T`.
    pub iterations: u64,
    pub seed: u64,
    /// Metrics are recorded after update 1, every `record_every`-th update and the last one.
    pub record_every: u64,
    /// Sampled episodes per block per iteration for the bandit and linear solvers.
    pub episodes_per_iteration: usize,
    pub reference: Option<Arc<ReferenceSolution>>,
    pub execution: Execution,
    /// Fill `RunRecord::wall_ms`. Off by default so records are reproducible.
    pub record_wall_time: bool,
}

impl SolverConfig {
    pub fn new(lambda: f64, schedules: Schedules, iterations: u64) -> Self {
        Self {
            lambda,
            schedules,
            iterations,
            seed: 0,
            record_every: 1,
            episodes_per_iteration: 1,
            reference: None,
            execution: Execution::default(),
            record_wall_time: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_record_every(mut self, k: u64) -> Self {
        self.record_every = k;
        self
    }

    pub fn with_reference(mut self, reference: Arc<ReferenceSolution>) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        check_lambda(self.lambda)?;
        self.schedules.validate()?;
        if self.iterations == 0 {
            return Err(GmfgError::InvalidParams("iteration budget must be at least 1".into()));
        }
        if self.record_every == 0 {
            return Err(GmfgError::InvalidParams("record_every must be at least 1".into()));
        }
        if self.episodes_per_iteration == 0 {
            return Err(GmfgError::InvalidParams("episodes_per_iteration must be at least 1".into()));
        }
        if let Some(r) = &self.reference {
            r.validate(model)?;
        }
        Ok(())
    }
}

/// Metrics after update `iter`, i.e. evaluated at `π_{iter+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub iter: u64,
    pub exploitability: f64,
    pub kl_to_reference: Option<f64>,
    pub wall_ms: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SolverOutput {
    pub policy: PolicyProfile,
    pub records: Vec<RunRecord>,
    /// Final ridge statistics of the linear solver.
    pub ridge: Option<RidgeState>,
    /// Final time-averaged flow of fictitious play.
    pub average_flow: Option<FlowProfile>,
}

/// Current iterate plus the metric stream.
#[derive(Debug)]
pub struct RunState {
    pub policy: PolicyProfile,
    pub iteration: u64,
    pub records: Vec<RunRecord>,
    started: Instant,
}

impl RunState {
    pub fn new(policy: PolicyProfile) -> Self {
        Self { policy, iteration: 0, records: Vec::new(), started: Instant::now() }
    }

    pub(crate) fn is_due(config: &SolverConfig, t: u64) -> bool {
        t == 1 || t.is_multiple_of(config.record_every) || t == config.iterations
    }

    /// Records metrics of the current iterate when `t` is due.
    pub(crate) fn finish_iteration(&mut self, model: &ModelSpec, config: &SolverConfig, t: u64) -> Result<()> {
        self.iteration = t;
        if !Self::is_due(config, t) {
            return Ok(());
        }
        let policy = &self.policy;
        let kl_to_reference = match &config.reference {
            Some(r) => Some(kl_metric(policy, r, model.grid())?),
            None => None,
        };
        self.records.push(RunRecord {
            iter: t,
            exploitability: exploitability(model, policy)?,
            kl_to_reference,
            wall_ms: config.record_wall_time.then(|| self.started.elapsed().as_secs_f64() * 1e3),
            seed: config.seed,
        });
        Ok(())
    }

    pub(crate) fn into_output(self) -> SolverOutput {
        SolverOutput { policy: self.policy, records: self.records, ridge: None, average_flow: None }
    }
}
