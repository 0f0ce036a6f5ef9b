//! `ibnls`: command-line front end.

use clap::{Args, Parser, Subcommand};
use ibnls_cli::config::OUT_DIR_ENV;
use ibnls_cli::{resolve, run, Command, ConfigError, RunError};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ibnls", version, about = "Radial focusing inhomogeneous biharmonic NLS runs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve for and certify the ground state.
    Groundstate(Options),
    /// Evolve an initial datum and record the monitors.
    Evolve(Options),
    /// Compare an initial datum with the ground-state thresholds.
    Classify(Options),
    /// Check the virial identity along an evolution.
    Virial(Options),
    /// Run the inequality checks on seeded random fields.
    VerifyInequalities(Options),
    /// Solve ground states over a grid of `(N, b, q)`.
    Sweep(Options),
}

/// Shared flags; each one overrides the config file key of the same name.
#[derive(Args)]
struct Options {
    /// Flat `key = value` file or the manifest of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: $IBNLS_OUT_DIR, then the config file, then `ibnls-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dimension; `sweep` also accepts `a,b` lists and `start:step:end` ranges.
    #[arg(long = "N")]
    n: Option<String>,
    #[arg(long)]
    b: Option<String>,
    #[arg(long)]
    q: Option<String>,
    #[arg(long = "r-max")]
    r_max: Option<String>,
    /// Number of grid nodes.
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long = "t-final")]
    t_final: Option<String>,
    /// Steps between recorded samples.
    #[arg(long)]
    stride: Option<String>,
    /// `gaussian:a:w`, `scaled-zeta:l` or `file:path`.
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    /// Cutoff radius for the localized virial (0 for the pure virial only).
    #[arg(long)]
    radius: Option<String>,
    /// Any config key, as `KEY=VALUE`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Options {
    fn overrides(&self) -> Result<Vec<(String, String)>, ConfigError> {
        let named = [
            ("N", &self.n),
            ("b", &self.b),
            ("q", &self.q),
            ("r_max", &self.r_max),
            ("M", &self.m),
            ("dt", &self.dt),
            ("t_final", &self.t_final),
            ("stride", &self.stride),
            ("init", &self.init),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("radius", &self.radius),
        ];
        let mut out = Vec::new();
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| ConfigError::new("set", format!("expected KEY=VALUE, got `{s}`")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        out.extend(
            named
                .iter()
                .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))),
        );
        Ok(out)
    }
}

fn execute(command: Command, opts: Options) -> Result<(), RunError> {
    let overrides = opts.overrides()?;
    let env_out = std::env::var(OUT_DIR_ENV).ok();
    let (config, out) = resolve(opts.config.as_deref(), &overrides, opts.out, env_out)?;
    let manifest = run(command, &config, &out)?;
    println!(
        "{}",
        serde_json::to_string_pretty(&manifest.outputs).unwrap_or_default()
    );
    println!("manifest: {}", out.join("manifest.json").display());
    Ok(())
}

fn main() -> ExitCode {
    let (command, opts) = match Cli::parse().command {
        Cmd::Groundstate(o) => (Command::GroundState, o),
        Cmd::Evolve(o) => (Command::Evolve, o),
        Cmd::Classify(o) => (Command::Classify, o),
        Cmd::Virial(o) => (Command::Virial, o),
        Cmd::VerifyInequalities(o) => (Command::VerifyInequalities, o),
        Cmd::Sweep(o) => (Command::Sweep, o),
    };
    match execute(command, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let RunError::Regime(report) = &e {
                eprintln!("{}", serde_json::to_string_pretty(report).unwrap_or_default());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
