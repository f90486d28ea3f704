//! `lyapca`: command-line front end for the `lyapca` library.
//!
//! Exit codes: 0 success, 1 a check was violated or a suite failed, 2 usage,
//! configuration, budget or I/O errors.

mod commands;
mod config;
mod finite;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use lyapca::RunOptions;

use commands::Ctx;
use config::{resolve_budgets, RunConfig};
use output::{emit, Format};

#[derive(Parser, Debug)]
#[command(name = "lyapca", version, about = "Perturbation exponents, blocking words and entropy of 1D cellular automata")]
struct Cli {
    /// JSON run configuration; flags take precedence over its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Enumeration budget; overrides the config and CA_LYAPUNOV_BUDGET.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Space-time diagram of a configuration.
    Simulate(commands::SimulateArgs),
    /// Pointwise exponent of one configuration.
    Exponent(commands::ExponentArgs),
    /// Averaged exponents I⁺/I⁻ by Monte Carlo.
    AvgExponent(commands::SequenceArgs),
    /// Maximal exponents λ⁺/λ⁻ over the support of the measure.
    LambdaMu(commands::SequenceArgs),
    /// Shift or automaton entropy, analytic or estimated.
    Entropy(commands::EntropyArgs),
    /// Exact space-time pattern counts.
    Patterns(commands::PatternArgs),
    /// Certify a blocking word, or search for one.
    Blocking(commands::BlockingArgs),
    /// Decide surjectivity of the global map.
    Surjective(commands::SurjectiveArgs),
    /// Check one entropy/exponent inequality.
    Check(commands::CheckArgs),
    /// Randomized property suite.
    Properties(commands::PropertiesArgs),
    /// Recompute the quantities of a worked example.
    Reproduce(commands::ReproduceArgs),
    /// Growth of the averaged exponents against a blocking certificate.
    Dichotomy(commands::DichotomyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Exponent(_) => "exponent",
            Command::AvgExponent(_) => "avg-exponent",
            Command::LambdaMu(_) => "lambda-mu",
            Command::Entropy(_) => "entropy",
            Command::Patterns(_) => "patterns",
            Command::Blocking(_) => "blocking",
            Command::Surjective(_) => "surjective",
            Command::Check(_) => "check",
            Command::Properties(_) => "properties",
            Command::Reproduce(_) => "reproduce",
            Command::Dichotomy(_) => "dichotomy",
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(op) = &cfg.operation {
        if op != cli.command.name() {
            bail!("config operation {op:?} does not match the subcommand {:?}", cli.command.name());
        }
    }
    let workers = cli.workers.or(cfg.workers);
    if workers == Some(0) {
        bail!("--workers must be positive");
    }
    let run = RunOptions {
        budgets: resolve_budgets(cli.budget, cfg.budget)?,
        workers,
    };
    let format = cli.format.or(cfg.format).unwrap_or(Format::Text);
    let out = cli.out.clone().or_else(|| cfg.out.clone());
    let ctx = Ctx { cfg, run };
    let report = match &cli.command {
        Command::Simulate(a) => commands::simulate(&ctx, a),
        Command::Exponent(a) => commands::exponent(&ctx, a),
        Command::AvgExponent(a) => commands::avg_exponent(&ctx, a),
        Command::LambdaMu(a) => commands::lambda_mu(&ctx, a),
        Command::Entropy(a) => commands::entropy(&ctx, a),
        Command::Patterns(a) => commands::patterns(&ctx, a),
        Command::Blocking(a) => commands::blocking(&ctx, a),
        Command::Surjective(a) => commands::surjective(&ctx, a),
        Command::Check(a) => commands::check(&ctx, a),
        Command::Properties(a) => commands::properties(&ctx, a),
        Command::Reproduce(a) => commands::reproduce(&ctx, a),
        Command::Dichotomy(a) => commands::dichotomy(&ctx, a),
    }?;
    emit(&report.render(format)?, out.as_deref())?;
    Ok(report.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
