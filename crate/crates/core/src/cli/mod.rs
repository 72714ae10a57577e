//! Command-line front end: argument parsing, config resolution and output.

pub mod config;
pub mod experiments;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::Config;
use experiments::Table;

use crate::error::{Error, Result};
use crate::sim::scenario_trajectory;

#[derive(Debug, Parser)]
#[command(name = "crpower", version, about = "Cognitive radio power control experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Config file of `key = value` lines.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the `seed` key.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal power over the (r2, theta) grid.
    Surface(Common),
    /// One theta column of the surface, with reachability.
    Slice(Common),
    /// Concurrent radius against CTx power.
    RadiusSweep(Common),
    /// PDR of optimal and fixed-power control across speeds and seeds.
    Pdr(Common),
    /// PDR under log-normal shadowing, with the matching unshadowed sweep.
    PdrShadow(Common),
    /// A single scenario.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write the sampled CRx trajectory to this CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
}

/// Experiment kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Surface,
    Slice,
    RadiusSweep,
    Pdr,
    PdrShadow,
    Run,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Surface => "surface",
            Kind::Slice => "slice",
            Kind::RadiusSweep => "radius-sweep",
            Kind::Pdr => "pdr",
            Kind::PdrShadow => "pdr-shadow",
            Kind::Run => "run",
        }
    }
}

/// One requested experiment: what to run, the overrides and where to write.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub overrides: Vec<(String, String)>,
    pub output_path: Option<PathBuf>,
    pub trajectory_path: Option<PathBuf>,
}

impl ExperimentSpec {
    /// The base config with this spec's overrides applied, validated.
    pub fn resolve(&self, base: &Config) -> Result<Config> {
        let mut cfg = base.clone();
        for (key, value) in &self.overrides {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Exit status for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::NonPositive { .. } => 2,
        _ => 1,
    }
}

/// Splits the parsed command line into the spec and the config to load.
pub fn plan(cli: &Cli) -> Result<(ExperimentSpec, PathBuf)> {
    let (kind, common, trajectory) = match &cli.command {
        Command::Surface(c) => (Kind::Surface, c, None),
        Command::Slice(c) => (Kind::Slice, c, None),
        Command::RadiusSweep(c) => (Kind::RadiusSweep, c, None),
        Command::Pdr(c) => (Kind::Pdr, c, None),
        Command::PdrShadow(c) => (Kind::PdrShadow, c, None),
        Command::Run { common, trajectory } => (Kind::Run, common, trajectory.clone()),
    };
    let mut overrides = Vec::new();
    for assignment in &common.set {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set {assignment:?} is not key=value")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(seed) = common.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    let spec = ExperimentSpec {
        kind,
        overrides,
        output_path: common.out.clone(),
        trajectory_path: trajectory,
    };
    Ok((spec, common.config.clone()))
}

/// Parses, resolves and runs a full command line.
pub fn main_with(cli: &Cli) -> Result<()> {
    let (spec, config_path) = plan(cli)?;
    let base = Config::load(&config_path)?;
    let cfg = spec.resolve(&base)?;
    execute(&spec, &cfg)
}

fn open(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn write_table(out: &mut dyn Write, cfg: &Config, kind: Kind, table: &Table) -> Result<()> {
    writeln!(out, "# command={}", kind.name())?;
    out.write_all(cfg.echo().as_bytes())?;
    table.write_csv(&mut *out)?;
    Ok(())
}

/// `runs.csv` → `runs_summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("pdr");
    let ext = out.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    out.with_file_name(format!("{stem}_summary.{ext}"))
}

/// Runs a resolved experiment and writes its output.
pub fn execute(spec: &ExperimentSpec, cfg: &Config) -> Result<()> {
    let out_path = spec.output_path.as_deref();
    match spec.kind {
        Kind::Surface | Kind::Slice | Kind::RadiusSweep | Kind::Run => {
            let table = match spec.kind {
                Kind::Surface => experiments::surface(cfg),
                Kind::Slice => experiments::slice(cfg),
                Kind::RadiusSweep => experiments::radius_sweep(cfg),
                _ => experiments::single_run(cfg)?,
            };
            let mut out = open(out_path)?;
            write_table(&mut out, cfg, spec.kind, &table)?;
            out.flush()?;
            if let Some(path) = &spec.trajectory_path {
                let traj = scenario_trajectory(&cfg.single_scenario())?;
                traj.write_csv(BufWriter::new(File::create(path)?), cfg.trajectory_step_s)?;
            }
        }
        Kind::Pdr | Kind::PdrShadow => {
            let report = if spec.kind == Kind::Pdr {
                experiments::pdr(cfg)?
            } else {
                experiments::pdr_shadow(cfg)?
            };
            let mut out = open(out_path)?;
            write_table(&mut out, cfg, spec.kind, &report.runs)?;
            match out_path {
                Some(p) => {
                    out.flush()?;
                    let mut summary = open(Some(&summary_path(p)))?;
                    write_table(&mut summary, cfg, spec.kind, &report.summary)?;
                    summary.flush()?;
                }
                None => {
                    writeln!(out, "# summary")?;
                    report.summary.write_csv(&mut out)?;
                    out.flush()?;
                }
            }
        }
    }
    Ok(())
}
