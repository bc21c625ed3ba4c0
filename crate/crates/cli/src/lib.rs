//! Command-line front end for the `lattice-kernel` library.
//!
//! Every run writes its artifacts plus a JSON manifest (resolved config,
//! seed, tool version, file digests, timestamps) into the output directory.
//! `replay` re-runs a manifest and checks that the outputs are identical.

pub mod commands;
pub mod config;
pub mod controls;
pub mod export;
pub mod manifest;

use clap::{Parser, Subcommand};
use config::{CompareConfig, Config};
use manifest::{now_ms, FileDigest, RunManifest};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "kernctl", version, about = "Controlled collision kernels: coefficients, oracles, simulation")]
pub struct Cli {
    /// TOML or JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides `seed` in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Override a config key, e.g. `--set coupling.A=2`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check controls against their constraints.
    Validate,
    /// Closed-form kernel coefficients.
    Kernel,
    /// Brute-force coefficients from the quadratic form.
    Oracle,
    /// Chebyshev basis polynomials of the achievable kernels.
    Basis,
    /// Controls for a target given by its free coefficients C.
    Synthesize,
    /// Path counts per part and endpoint.
    Paths,
    /// Ensemble simulation of the controlled chain.
    Simulate,
    /// Kinetic equation, homogeneous or with transport.
    Kinetic,
    /// L¹ distance between a simulated and a kinetic spectrum.
    Compare {
        #[arg(long)]
        simulation: Option<PathBuf>,
        #[arg(long)]
        kinetic: Option<PathBuf>,
    },
    /// Re-run a manifest and compare output digests.
    Replay {
        manifest: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Kernel => "kernel",
            Command::Oracle => "oracle",
            Command::Basis => "basis",
            Command::Synthesize => "synthesize",
            Command::Paths => "paths",
            Command::Simulate => "simulate",
            Command::Kinetic => "kinetic",
            Command::Compare { .. } => "compare",
            Command::Replay { .. } => "replay",
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn resolve_config(cli: &Cli) -> Result<Config, CliError> {
    let base = match &cli.config {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    let mut cfg = base.apply_overrides(&cli.sets)?;
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if cfg.seed.is_none() {
        cfg.seed = Some(config::DEFAULT_SEED);
    }
    if let Command::Compare { simulation, kinetic } = &cli.command {
        if let (Some(s), Some(k)) = (simulation, kinetic) {
            cfg.compare = Some(CompareConfig {
                simulation: s.clone(),
                kinetic: k.clone(),
            });
        } else if simulation.is_some() || kinetic.is_some() {
            return Err(CliError::Usage("--simulation and --kinetic go together".into()));
        }
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, &cli.out_dir);
    }
    let cfg = resolve_config(cli)?;
    let manifest = execute(cli.command.name(), &cfg, &cli.out_dir)?;
    println!(
        "wrote {} file(s) and {} to {}",
        manifest.outputs.len(),
        RunManifest::file_name(&manifest.subcommand),
        cli.out_dir.display()
    );
    Ok(())
}

/// Runs one subcommand and writes its manifest. A completed run whose
/// check fails still writes its outputs and then returns a validation error.
pub fn execute(subcommand: &str, cfg: &Config, out_dir: &Path) -> Result<RunManifest, CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_dir.display())))?;
    let started = now_ms();
    let report = match subcommand {
        "validate" => commands::validate(cfg, out_dir),
        "kernel" => commands::kernel(cfg, out_dir),
        "oracle" => commands::oracle(cfg, out_dir),
        "basis" => commands::basis(cfg, out_dir),
        "synthesize" => commands::synthesize(cfg, out_dir),
        "paths" => commands::paths(cfg, out_dir),
        "simulate" => commands::simulate(cfg, out_dir),
        "kinetic" => commands::kinetic(cfg, out_dir),
        "compare" => commands::compare(cfg, out_dir),
        other => Err(CliError::Usage(format!("unknown subcommand `{other}`"))),
    }?;
    let inputs = report
        .inputs
        .iter()
        .map(|p| FileDigest::of(p))
        .collect::<Result<Vec<_>, _>>()?;
    let outputs = report
        .outputs
        .iter()
        .map(|name| {
            FileDigest::of(&out_dir.join(name)).map(|d| FileDigest {
                path: PathBuf::from(name),
                ..d
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = RunManifest {
        subcommand: subcommand.to_string(),
        config: cfg.clone(),
        seed: cfg.seed.unwrap_or(config::DEFAULT_SEED),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        outputs,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
    };
    manifest.write(out_dir)?;
    for line in &report.summary {
        println!("{line}");
    }
    match report.failure {
        Some(msg) => Err(CliError::Validation(msg)),
        None => Ok(manifest),
    }
}

/// Re-runs `manifest` into `out_dir` and compares every output digest.
pub fn replay(manifest_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let old = RunManifest::read(manifest_path)?;
    let mut changed = Vec::new();
    for input in &old.inputs {
        let now = FileDigest::of(&input.path)?;
        if now.sha256 != input.sha256 {
            changed.push(format!("input {} changed", input.path.display()));
        }
    }
    if !changed.is_empty() {
        return Err(CliError::Validation(changed.join("; ")));
    }
    let same_dir = manifest_path
        .parent()
        .map(|p| p.canonicalize().ok() == out_dir.canonicalize().ok())
        .unwrap_or(false);
    if same_dir {
        return Err(CliError::Usage(
            "replay needs an --out-dir different from the manifest's directory".into(),
        ));
    }
    let new = execute(&old.subcommand, &old.config, out_dir)?;
    let mut diffs = Vec::new();
    for o in &old.outputs {
        match new.outputs.iter().find(|n| n.path == o.path) {
            Some(n) if n.sha256 == o.sha256 => {}
            Some(_) => diffs.push(format!("{} differs", o.path.display())),
            None => diffs.push(format!("{} missing", o.path.display())),
        }
    }
    if diffs.is_empty() {
        println!("replay of {}: {} output(s) identical", old.subcommand, old.outputs.len());
        Ok(())
    } else {
        Err(CliError::Validation(diffs.join("; ")))
    }
}
