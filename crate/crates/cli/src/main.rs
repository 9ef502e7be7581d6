//! `graphshrink`: verification sweeps and experiments for graphical
//! self-shrinking surfaces in R⁴.
//!
//! Exit codes: 0 success, 1 assertion failure, 2 configuration error,
//! 3 precondition violation.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{parse_overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Assertion(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Config(_) => 2,
            CliError::Precondition(_) => 3,
        }
    }

    fn class(&self) -> &'static str {
        match self {
            CliError::Assertion(_) => "assertion_failure",
            CliError::Config(_) => "config_error",
            CliError::Precondition(_) => "precondition_violation",
        }
    }
}

impl From<graphshrink::Error> for CliError {
    fn from(e: graphshrink::Error) -> Self {
        use graphshrink::Error as E;
        match e {
            E::Lex { .. } | E::Syntax { .. } | E::Arity { .. } | E::InvalidArgument(_) => CliError::Config(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "graphshrink", version, about = "Identity checks, quadrature and shrinker solves for graphs in R⁴")]
struct Cli {
    /// TOML run configuration; every key can be overridden by `--section.key value`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for reports; `star` and `svd` only write when it is given.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for corpora and perturbations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep the identity verifiers over the random-graph corpus and exact shrinkers.
    Verify {
        /// `full` or `quick`.
        #[arg(long)]
        suite: Option<String>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
        overrides: Vec<String>,
    },
    /// Hodge stars of the four named forms on the graph of `f1;f2` at a point.
    Star {
        /// `"f1;f2"`.
        #[arg(long)]
        map: Option<String>,
        /// `x1,x2`.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
        overrides: Vec<String>,
    },
    /// Oriented singular values, bases and stars of a 2×2 differential.
    Svd {
        /// `a,b,c,d` = `[∂1 f1, ∂2 f1, ∂1 f2, ∂2 f2]`.
        #[arg(long, allow_hyphen_values = true)]
        matrix: Option<String>,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
        overrides: Vec<String>,
    },
    /// Solve the discrete shrinker system from a perturbed affine map.
    Solve {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
        overrides: Vec<String>,
    },
    /// Area inside balls and its ratio to r².
    Growth {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
        overrides: Vec<String>,
    },
    /// Every quantity of the weighted-integral chain at one radius.
    Chain {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
        overrides: Vec<String>,
    },
    /// Relaxation of perturbed affine maps under the solver.
    Probe {
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
        overrides: Vec<String>,
    },
}

fn comma_list(flag: &str, raw: &str, len: usize) -> Result<String, CliError> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != len || parts.iter().any(|p| p.parse::<f64>().is_err()) {
        return Err(CliError::Config(format!("--{flag} expects {len} comma-separated numbers, got {raw:?}")));
    }
    Ok(format!("[{}]", parts.join(", ")))
}

/// Flag shorthands become ordinary overrides, applied after the trailing ones.
fn collect_overrides(cli: &Cli) -> Result<(&'static str, Vec<(String, String)>), CliError> {
    let mut extra = Vec::new();
    let (name, rest) = match &cli.command {
        Command::Verify { suite, overrides } => {
            if let Some(s) = suite {
                extra.push(("verify.suite".to_string(), format!("{s:?}")));
            }
            ("verify", overrides)
        }
        Command::Star { map, at, overrides } => {
            if let Some(m) = map {
                let (f1, f2) = m
                    .split_once(';')
                    .ok_or_else(|| CliError::Config(format!("--map expects \"f1;f2\", got {m:?}")))?;
                extra.push(("surface.kind".into(), "\"graph\"".into()));
                extra.push(("surface.f1".into(), format!("{:?}", f1.trim())));
                extra.push(("surface.f2".into(), format!("{:?}", f2.trim())));
            }
            if let Some(a) = at {
                extra.push(("star.at".into(), comma_list("at", a, 2)?));
            }
            ("star", overrides)
        }
        Command::Svd { matrix, overrides } => {
            if let Some(m) = matrix {
                extra.push(("svd.matrix".into(), comma_list("matrix", m, 4)?));
            }
            ("svd", overrides)
        }
        Command::Solve { overrides } => ("solve", overrides),
        Command::Growth { overrides } => ("growth", overrides),
        Command::Chain { overrides } => ("chain", overrides),
        Command::Probe { overrides } => ("probe", overrides),
    };
    let mut all = parse_overrides(rest)?;
    if let Some(seed) = cli.seed {
        all.push(("seed".into(), seed.to_string()));
    }
    all.extend(extra);
    Ok((name, all))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (name, overrides) = collect_overrides(cli)?;
    let cfg = RunConfig::resolve(cli.config.as_deref(), &overrides)?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    // sweeps always write; the two point queries only on request
    let dir = cli
        .out
        .clone()
        .or_else(|| (!matches!(name, "star" | "svd")).then(|| PathBuf::from("graphshrink-out")));
    let out = output::Output::new(dir, name, &cfg);
    match name {
        "verify" => commands::verify(&cfg, &out),
        "star" => commands::star(&cfg, &out),
        "svd" => commands::svd(&cfg, &out),
        "solve" => commands::solve(&cfg, &out),
        "growth" => commands::growth(&cfg, &out),
        "chain" => commands::chain(&cfg, &out),
        _ => commands::probe(&cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let diag = serde_json::json!({
                "status": e.class(),
                "exit_code": e.code(),
                "message": e.to_string(),
            });
            eprintln!("{diag}");
            ExitCode::from(e.code())
        }
    }
}
