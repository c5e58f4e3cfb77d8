//! `pesat`: runs one experiment from a TOML configuration and writes JSON and
//! CSV artifacts plus a manifest that reproduces the run.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use config::{ConfigError, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    VerifyIdentities,
    Saturate,
    Simulate,
    ProbeLimits,
    Steer,
    Gramian,
    Mix,
}

#[derive(Parser, Debug)]
#[command(name = "pesat", version, about = "Saturation, control and mixing experiments for the forced primitive equations")]
struct Cli {
    /// Experiment to run; taken from the manifest when `--manifest` is given.
    #[arg(value_enum, required_unless_present = "manifest")]
    command: Option<Command>,
    /// TOML configuration; defaults apply when absent.
    #[arg(long, env = "PESAT_CONFIG")]
    config: Option<PathBuf>,
    /// Noise seed; overrides `noise.seed`.
    #[arg(long, env = "PESAT_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "PESAT_OUT", default_value = "pesat-out")]
    out: PathBuf,
    /// Worker threads for ensembles and sampling.
    #[arg(long, env = "PESAT_THREADS")]
    threads: Option<usize>,
    /// Re-run exactly what a previous manifest records.
    #[arg(long, conflicts_with_all = ["config", "seed"])]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    command: Command,
    seed: u64,
    config_sha256: String,
    /// Resolved configuration, overrides applied.
    config: String,
    versions: Versions,
    artifacts: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Versions {
    pesat_cli: String,
    pesat_core: String,
}

/// Failure of a run, with its exit code.
pub enum Failure {
    Config(ConfigError),
    Experiment { kind: String, message: String },
}

impl From<pesat_core::PeError> for Failure {
    fn from(e: pesat_core::PeError) -> Self {
        let kind = format!("{e:?}");
        let kind = kind.split(['(', ' ', '{']).next().unwrap_or("Error").to_string();
        Failure::Experiment { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Experiment { kind: "Io".into(), message: e.to_string() }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Experiment { .. } => 1,
        }
    }

    fn record(&self) -> serde_json::Value {
        match self {
            Failure::Config(e) => serde_json::json!({ "error": "ConfigError", "key": e.key, "message": e.message, "exit_code": 2 }),
            Failure::Experiment { kind, message } => {
                serde_json::json!({ "error": kind, "message": message, "exit_code": 1 })
            }
        }
    }
}

fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn config_error(key: Option<&str>, message: String) -> Failure {
    Failure::Config(ConfigError { key: key.map(str::to_string), message })
}

/// Resolves the command, configuration and seed from the flags or a manifest.
fn resolve(cli: &Cli) -> Result<(Command, RunConfig), Failure> {
    if let Some(path) = &cli.manifest {
        let text = fs::read_to_string(path).map_err(|e| config_error(Some("manifest"), format!("{}: {e}", path.display())))?;
        let m: Manifest = serde_json::from_str(&text).map_err(|e| config_error(Some("manifest"), e.to_string()))?;
        if sha256_hex(&m.config) != m.config_sha256 {
            return Err(config_error(Some("manifest.config_sha256"), "hash does not match the recorded config".into()));
        }
        let cfg = config::parse(&m.config, &[]).map_err(Failure::Config)?;
        return Ok((m.command, cfg));
    }
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path).map_err(|e| config_error(Some("config"), format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut overrides = config::env_overrides();
    if let Some(seed) = cli.seed {
        overrides.push(("noise.seed".into(), seed.to_string()));
    }
    let cfg = config::parse(&text, &overrides).map_err(Failure::Config)?;
    Ok((cli.command.expect("clap requires a command without a manifest"), cfg))
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<String, Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Experiment { kind: "Serialize".into(), message: e.to_string() })?;
    fs::write(dir.join(name), text + "\n")?;
    Ok(name.to_string())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let (command, cfg) = resolve(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(config_error(Some("threads"), "must be at least 1".into()));
        }
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    fs::create_dir_all(&cli.out)?;
    let resolved = toml::to_string(&cfg).map_err(|e| config_error(None, e.to_string()))?;
    let outcome = commands::dispatch(command, &cfg, &cli.out)?;
    let manifest = Manifest {
        command,
        seed: cfg.noise.seed,
        config_sha256: sha256_hex(&resolved),
        config: resolved,
        versions: Versions { pesat_cli: env!("CARGO_PKG_VERSION").into(), pesat_core: pesat_core::VERSION.into() },
        artifacts: outcome.artifacts,
    };
    write_json(&cli.out, "manifest.json", &manifest)?;
    println!("{}", outcome.summary);
    if outcome.passed {
        Ok(())
    } else {
        Err(Failure::Experiment { kind: "CheckFailed".into(), message: outcome.summary })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let record = f.record();
            eprintln!("{record}");
            if fs::create_dir_all(&cli.out).is_ok() {
                let _ = fs::write(cli.out.join("error.json"), format!("{record:#}\n"));
            }
            ExitCode::from(f.code())
        }
    }
}
