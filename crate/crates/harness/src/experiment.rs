use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use chrono::{SecondsFormat, Utc};
use gmfg_core::environments::{linear_spec_for, make_environment};
use gmfg_core::metrics::{probe_random_pairs, Provenance, ReferenceSolution};
use gmfg_core::solvers::{solve_bandit, solve_fictitious_play, solve_full_info, solve_linear, SolverOutput};
use gmfg_core::{Execution, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SolverKind, SCHEMA_VERSION};
use crate::output::{records_to_csv, sha256_hex, ArtifactDigest, Manifest, RunEntry, RunStatus};

pub const OUT_DIR_ENV: &str = "GMFG_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "runs";

/// Output root: command-line flag, then the config, then `GMFG_OUT_DIR`,
/// then `./runs`.
pub fn resolve_output_root(flag: Option<&Path>, config: &ExperimentConfig, env: Option<&str>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Concurrent seeds; `None` uses every logical core.
    pub jobs: Option<usize>,
    pub output_root: Option<PathBuf>,
    pub execution: Execution,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn solve(config: &ExperimentConfig, model: &ModelSpec, solver: &gmfg_core::solvers::SolverConfig) -> Result<SolverOutput> {
    Ok(match config.solver {
        SolverKind::FullInfo => solve_full_info(model, solver)?,
        SolverKind::Bandit => solve_bandit(model, solver)?,
        SolverKind::Linear => solve_linear(model, &linear_spec_for(&config.environment, model)?, solver)?,
        SolverKind::FictitiousPlay => solve_fictitious_play(model, solver)?,
    })
}

/// Runs one seed and returns the CSV bytes.
pub fn run_seed(config: &ExperimentConfig, reference: Option<Arc<ReferenceSolution>>, seed: u64, execution: Execution) -> Result<Vec<u8>> {
    let model = make_environment(&config.environment)?;
    let mut solver = config.solver_config(seed)?.with_execution(execution);
    solver.reference = reference;
    let out = solve(config, &model, &solver)?;
    records_to_csv(&out.records)
}

fn on_pool<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build().context("building worker pool")?;
        Ok(pool.install(work))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = jobs;
        Ok(work())
    }
}

fn map_seeds<F>(execution: Execution, seeds: &[u64], f: F) -> Vec<RunEntry>
where
    F: Fn(u64) -> RunEntry + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if execution.is_parallel() {
        use rayon::prelude::*;
        return seeds.par_iter().map(|&s| f(s)).collect();
    }
    let _ = execution;
    seeds.iter().map(|&s| f(s)).collect()
}

/// Runs every seed, writes `seed-<n>.csv` files and `manifest.json` under
/// `<root>/<label>/`. Returns an error only when nothing could be written;
/// per-seed failures are recorded in the manifest.
pub fn run_experiment(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentReport> {
    config.validate()?;
    if let Some(jobs) = options.jobs {
        ensure!(jobs > 0, "--jobs must be at least 1");
    }
    let env = std::env::var(OUT_DIR_ENV).ok();
    let root = resolve_output_root(options.output_root.as_deref(), config, env.as_deref());
    let dir = root.join(config.label());
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let started_at = now();
    let (reference, reference_digest) = match &config.reference {
        Some(path) => {
            let bytes = std::fs::read(path).with_context(|| format!("reading reference {}", path.display()))?;
            let artifact = ReferenceArtifact::from_bytes(&bytes).with_context(|| format!("in {}", path.display()))?;
            let digest = ArtifactDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) };
            (Some(Arc::new(artifact.reference)), Some(digest))
        }
        None => (None, None),
    };
    // Fail before any run when the reference does not fit the environment.
    if let Some(r) = &reference {
        r.validate(&make_environment(&config.environment)?).context("reference does not match the environment")?;
    }

    let runs = on_pool(options.jobs, || {
        map_seeds(options.execution, &config.seeds, |seed| {
            let name = format!("seed-{seed}.csv");
            let result = run_seed(config, reference.clone(), seed, options.execution)
                .and_then(|bytes| std::fs::write(dir.join(&name), &bytes).map(|_| bytes).context("writing csv"));
            match result {
                Ok(bytes) => RunEntry {
                    seed,
                    status: RunStatus::Ok,
                    csv: Some(name),
                    sha256: Some(sha256_hex(&bytes)),
                    rows: Some(bytes.iter().filter(|b| **b == b'\n').count() - 1),
                    error: None,
                },
                Err(e) => RunEntry { seed, status: RunStatus::Failed, csv: None, sha256: None, rows: None, error: Some(format!("{e:#}")) },
            }
        })
    })?;

    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        started_at,
        finished_at: now(),
        runs,
        reference: reference_digest,
    };
    manifest.write(&dir.join("manifest.json"))?;
    Ok(ExperimentReport { dir, manifest })
}

/// On-disk reference: the surrogate equilibrium plus the config that made it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceArtifact {
    pub schema_version: u32,
    pub created_at: String,
    pub config: ExperimentConfig,
    pub reference: ReferenceSolution,
}

impl ReferenceArtifact {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let artifact: Self = serde_json::from_slice(bytes).context("malformed reference artifact")?;
        ensure!(artifact.schema_version == SCHEMA_VERSION, "unsupported reference schema_version {}", artifact.schema_version);
        Ok(artifact)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, serde_json::to_vec(self)?).with_context(|| format!("writing {}", path.display()))
    }
}

/// Long full-information run whose last iterate serves as `π*`.
pub fn build_reference(config: &ExperimentConfig, execution: Execution) -> Result<ReferenceArtifact> {
    config.validate()?;
    if config.solver != SolverKind::FullInfo {
        bail!("references are built with the full_info solver, not {}", config.solver.name());
    }
    ensure!(config.lambda > 0.0, "a reference needs lambda > 0; the unregularized equilibrium need not be unique");
    let model = make_environment(&config.environment)?;
    let seed = config.seeds[0];
    let mut solver = config.solver_config(seed)?.with_execution(execution);
    // Only the final iterate matters here.
    solver.record_every = config.iterations;
    let out = solve_full_info(&model, &solver)?;
    let provenance = Provenance { solver: SolverKind::FullInfo.name().to_string(), iterations: config.iterations, lambda: config.lambda, seed };
    Ok(ReferenceArtifact {
        schema_version: SCHEMA_VERSION,
        created_at: now(),
        config: config.clone(),
        reference: ReferenceSolution::new(&model, out.policy, provenance)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub environment: String,
    pub pairs: usize,
    pub seed: u64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub negative: usize,
    pub values: Vec<f64>,
}

impl ProbeReport {
    pub fn consistent_with_monotone(&self) -> bool {
        self.negative == 0
    }
}

/// Monotonicity probe on `pairs` random occupancy pairs drawn from the
/// config's first seed.
pub fn probe_monotone(config: &ExperimentConfig, pairs: usize, execution: Execution) -> Result<ProbeReport> {
    ensure!(pairs > 0, "need at least one pair");
    let model = make_environment(&config.environment)?;
    let seed = config.seeds.first().copied().unwrap_or(0);
    let values = probe_random_pairs(execution, &model, pairs, seed)?;
    Ok(ProbeReport {
        environment: config.environment.name().to_string(),
        pairs,
        seed,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean: values.iter().sum::<f64>() / pairs as f64,
        negative: values.iter().filter(|v| **v < 0.0).count(),
        values,
    })
}
