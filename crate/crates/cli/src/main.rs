mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::Config;

const AFTER_HELP: &str = "\
Configs are INI files: [section] headers and flat `key = value` lines; unknown
keys are rejected. Common keys: [run] seed, jobs, out.

Curvature fields are written as
  const:<K>                constant K
  pow:<a>,<q>[,<p>]        a·|x − p|^q, pole p = 0 by default
  table:<path>             CSV rows x,k, linear in between
  min(<e1>,<e2>)           pointwise minimum
and `<key>_times_n_minus_1 = true` multiplies a field by N − 1.

Measures are `uniform:<lo>,<hi>` or `table:<path>` (rows x,rho).

Exit status: 0 all verdicts pass, 1 violation, 2 usage or config error,
3 borderline or non-converged numerics.";

#[derive(Parser)]
#[command(name = "curvdim", version, about = "Curvature-dimension verifiers for weighted intervals", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (INI).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports and CSV artifacts (overrides [run] out).
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Solve u'' + κu = 0 from (0, 1) and dump 𝔰, 𝔠.
    Sin,
    /// Batch σ (and σ_{k,N}, τ_{k,N}) over θ and t.
    Distortion,
    /// κu-convexity checkers on a sampled function.
    Convexity,
    /// Pointwise, entropy, reduced, CD(k,∞) and weighted-measure checks.
    Cd,
    /// Brunn–Minkowski for two intervals.
    Bm,
    /// Bishop–Gromov ratio comparison.
    Bg,
    /// Measured doubling ratios against the bound.
    Doubling,
    /// Diameter bound and oscillation witness.
    Schneider,
    /// CD on a product of two intervals.
    Tensor,
    /// The full acceptance run.
    Suite,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Sin => "sin",
            Command::Distortion => "distortion",
            Command::Convexity => "convexity",
            Command::Cd => "cd",
            Command::Bm => "bm",
            Command::Bg => "bg",
            Command::Doubling => "doubling",
            Command::Schneider => "schneider",
            Command::Tensor => "tensor",
            Command::Suite => "suite",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(curvdim::Error),
}

impl From<curvdim::Error> for CliError {
    fn from(e: curvdim::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(curvdim::Error::Borderline { .. } | curvdim::Error::NotConverged { .. }) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None if matches!(cli.command, Command::Suite) => Config::empty(),
        None => return Err(CliError::Usage(format!("`{}` needs --config <file>", cli.command.name()))),
    };
    let seed = cfg.u64_or("run", "seed", curvdim::suite::SuiteOptions::default().seed)?;
    let jobs = cfg.usize_or("run", "jobs", 0)?;
    let out = match &cli.out {
        Some(o) => o.clone(),
        None => cfg.opt_str("run", "out").map_or_else(|| PathBuf::from("."), |o| cfg.path(&o)),
    };
    if jobs > 0 {
        // workers share nothing; results are merged in input order
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("[run] jobs: {e}")))?;
    }
    std::fs::create_dir_all(&out).map_err(|e| CliError::Usage(format!("{}: {e}", out.display())))?;
    let o = match cli.command {
        Command::Sin => commands::sin(&mut cfg, &out)?,
        Command::Distortion => commands::distortion(&mut cfg, &out)?,
        Command::Convexity => commands::convexity(&mut cfg)?,
        Command::Cd => commands::cd(&mut cfg, &out)?,
        Command::Bm => commands::bm(&mut cfg, &out)?,
        Command::Bg => commands::bg(&mut cfg, &out)?,
        Command::Doubling => commands::doubling(&mut cfg, &out)?,
        Command::Schneider => commands::schneider(&mut cfg)?,
        Command::Tensor => commands::tensor(&mut cfg)?,
        Command::Suite => commands::suite(&mut cfg, &out, seed)?,
    };
    let report = json!({
        "command": cli.command.name(),
        "config": cfg.resolved(),
        "passed": o.passed,
        "result": o.result,
    });
    let text = serde_json::to_string_pretty(&report).expect("json values serialize");
    write_report(&out, cli.command.name(), &text)?;
    println!("{text}");
    Ok(o.passed)
}

fn write_report(out: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let p = out.join(format!("{name}_report.json"));
    std::fs::write(&p, format!("{text}\n")).map_err(|e| CliError::Lib(curvdim::Error::Io(format!("{}: {e}", p.display()))))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("curvdim {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
