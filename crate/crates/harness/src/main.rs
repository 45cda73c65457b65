use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gmfg_core::Execution;
use gmfg_harness::{build_reference, presets, probe_monotone, run_experiment, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "gmfg", version, about = "Run graphon mean-field game experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present_any = ["preset", "list_presets"])]
    config: Option<PathBuf>,
    /// Named preset instead of a config file.
    #[arg(long)]
    preset: Option<String>,
    /// Print the preset names and exit.
    #[arg(long)]
    list_presets: bool,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path),
            (None, Some(name)) => presets::get(name).with_context(|| format!("unknown preset {name:?}; known: {}", presets::names().join(", "))),
            (None, None) => bail!("pass --config or --preset"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every seed of an experiment and write CSVs plus a manifest.
    Run {
        #[command(flatten)]
        source: Source,
        /// Seeds run concurrently (default: logical cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Output root; overrides the config and GMFG_OUT_DIR.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Build a reference equilibrium with a long full-information run.
    Reference {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the monotonicity probe on random occupancy pairs.
    ProbeMonotone {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1000)]
        pairs: usize,
    },
}

fn list_presets(source: &Source) -> bool {
    if source.list_presets {
        for name in presets::names() {
            println!("{name}");
        }
    }
    source.list_presets
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { source, jobs, out_dir } => {
            if list_presets(&source) {
                return Ok(true);
            }
            let config = source.load()?;
            let options = RunOptions { jobs, output_root: out_dir, execution: Execution::default() };
            let report = run_experiment(&config, &options)?;
            print!("{}", report.manifest.summary());
            println!("manifest: {}", report.dir.join("manifest.json").display());
            Ok(report.manifest.all_ok())
        }
        Command::Reference { source, out } => {
            if list_presets(&source) {
                return Ok(true);
            }
            let artifact = build_reference(&source.load()?, Execution::default())?;
            artifact.write(&out)?;
            let p = &artifact.reference.provenance;
            println!("reference ({}, T = {}, lambda = {}) -> {}", p.solver, p.iterations, p.lambda, out.display());
            Ok(true)
        }
        Command::ProbeMonotone { source, pairs } => {
            if list_presets(&source) {
                return Ok(true);
            }
            let report = probe_monotone(&source.load()?, pairs, Execution::default())?;
            println!(
                "{}: {} pairs, min {:e}, max {:e}, mean {:e}, negative {}",
                report.environment, report.pairs, report.min, report.max, report.mean, report.negative
            );
            println!("{}", if report.consistent_with_monotone() { "no violation found" } else { "monotonicity violated" });
            Ok(report.consistent_with_monotone())
        }
    }
}
