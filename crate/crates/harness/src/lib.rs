//! Experiment runner for the `gmfg-core` solvers.
//!
//! An [`ExperimentConfig`] names an environment, a solver, its schedules and
//! a list of seeds. [`run_experiment`] runs every seed (concurrently when
//! built with `parallel`), writes one CSV of metric records per seed and a
//! `manifest.json` echoing the config with checksums of every artifact.

pub mod config;
pub mod experiment;
pub mod output;
pub mod presets;

pub use config::{ExperimentConfig, SolverKind, SCHEMA_VERSION};
pub use experiment::{build_reference, probe_monotone, run_experiment, ExperimentReport, ProbeReport, ReferenceArtifact, RunOptions};
pub use output::{read_csv, records_to_csv, Manifest, RunStatus};
