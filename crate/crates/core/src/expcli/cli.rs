//! Argument parsing and dispatch; `run` returns the process exit code.

use super::commands;
use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::verdict::{all_pass, Verdict};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

pub const OUT_ENV: &str = "CWSTAB_OUT";

#[derive(Debug, Parser)]
#[command(name = "cwstab", version, about = "Composite rarefaction + viscous shock laboratory")]
pub struct Cli {
    /// TOML file layered over the built-in defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (the CWSTAB_OUT environment variable takes precedence).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for the perturbation and the randomized suites.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker cap. The solver and the suites run on one thread.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Viscous shock profile table and its checks.
    Profile,
    /// Rarefaction and interaction envelopes and their checks.
    Rarefaction,
    /// Perturbed composite wave run with diagnostics and checkpoints.
    Simulate {
        /// Continue from this checkpoint; the series in the output directory is extended.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Randomized inequality suites and scheme convergence checks.
    Verify {
        /// Freeze one constant at zero; the run must then fail.
        #[arg(long)]
        force_failure: bool,
    },
    /// Summarize the verdict files in the output directory.
    Report,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Rarefaction => "rarefaction",
            Command::Simulate { .. } => "simulate",
            Command::Verify { .. } => "verify",
            Command::Report => "report",
        }
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        if i64::try_from(s).is_err() {
            return Err(Error::Config(format!("--seed {s} exceeds {}", i64::MAX)));
        }
        cfg.perturbation.seed = s;
        cfg.verify.seed = s;
    }
    if let Some(dir) = std::env::var_os(OUT_ENV).map(PathBuf::from).or_else(|| cli.out.clone()) {
        cfg.output.dir = dir;
    }
    Ok(cfg)
}

fn print_verdicts(title: &str, vs: &[Verdict]) {
    println!("{title}");
    for v in vs {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("  {tag}  {:<52} measured {:>12.5e}  threshold {:>12.5e}", v.criterion, v.measured, v.threshold);
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    if cli.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    let mut cfg = effective_config(cli)?;
    if cli.print_config {
        print!("{}", cfg.to_toml()?);
        return Ok(0);
    }
    let Some(cmd) = &cli.command else {
        return Err(Error::Usage("no command given (profile | rarefaction | simulate | verify | report)".into()));
    };
    let out: &Path = &cfg.output.dir.clone();
    let vs = match cmd {
        Command::Profile => commands::cmd_profile(&cfg, Some(out))?,
        Command::Rarefaction => commands::cmd_rarefaction(&cfg, Some(out))?,
        Command::Verify { force_failure } => {
            cfg.verify.force_failure |= *force_failure;
            commands::cmd_verify(&cfg, Some(out))?
        }
        Command::Simulate { resume } => {
            let sim = commands::simulate(&cfg, Some(out), resume.as_deref())?;
            print_verdicts("simulate", &sim.verdicts);
            println!("steps {}  rows {}  output {}", sim.artifacts.steps, sim.artifacts.records.len(), out.display());
            if let Some(e) = &sim.artifacts.error {
                eprintln!("error: {e}");
                return Ok(3);
            }
            return Ok(if all_pass(&sim.verdicts) { 0 } else { 1 });
        }
        Command::Report => {
            let found = commands::cmd_report(out)?;
            let mut ok = true;
            for (name, vs) in &found {
                print_verdicts(name, vs);
                ok &= all_pass(vs);
            }
            return Ok(if ok { 0 } else { 1 });
        }
    };
    print_verdicts(cmd.name(), &vs);
    Ok(if all_pass(&vs) { 0 } else { 1 })
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
