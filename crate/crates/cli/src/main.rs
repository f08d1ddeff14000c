use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use fermalg::checks::{self, SuiteConfig, BUILTIN_MODEL, CHECKS, MODEL_DIR_ENV};
use fermalg::wick::{Interaction, DEFAULT_ORDER};

/// Exit status for configuration errors; check failures exit with 1.
const CONFIG_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "fermalg", version, about = "Exact verification suites for fermionic algebra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write a JSON report.
    Check {
        /// Comma-separated suites: grassmann, functor, functionals, car, wick, or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long = "n-max", default_value_t = 3)]
        n_max: usize,
        /// `lattice:T=..,L=..[,m=..][,split=..]` or a model descriptor file.
        #[arg(long, default_value = BUILTIN_MODEL, long_help = model_help())]
        model: String,
        /// λ-truncation order of the perturbative suite.
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: u32,
        /// Interaction for the perturbative suite: quartic, mass or current.
        #[arg(long, default_value = "quartic")]
        interaction: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the report JSON instead of the summary.
        #[arg(long)]
        json: bool,
    },
    /// Show the reference and code location behind a check.
    Explain {
        /// Check name or reported operation name; omit to list all checks.
        check: Option<String>,
    },
    /// Print the JSON descriptor of a model.
    Model {
        #[arg(default_value = BUILTIN_MODEL)]
        spec: String,
    },
}

fn model_help() -> String {
    format!(
        "`lattice:T=..,L=..[,m=..][,split=symmetric|zero]` or a model descriptor file. \
         Relative paths that do not exist are looked up in ${MODEL_DIR_ENV}."
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}

fn execute(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Check { suite, seed, trials, n_max, model, order, interaction, out, json } => {
            let cfg = SuiteConfig {
                suites: checks::parse_suites(&suite)?,
                seed,
                trials,
                n_max,
                model,
                order,
                interaction: interaction.parse::<Interaction>()?,
                out,
            };
            let report = checks::run(&cfg).context("configuration error")?;
            if json {
                emit(&(report.to_json() + "\n"))?;
            } else {
                emit(&report.summary())?;
                if let Some(path) = &cfg.out {
                    emit(&format!("report written to {}\n", path.display()))?;
                }
            }
            Ok(ExitCode::from(report.exit_code() as u8))
        }
        Command::Explain { check: Some(name) } => {
            emit(&checks::explain(&name)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Explain { check: None } => {
            let rows: String =
                CHECKS.iter().map(|c| format!("{:<22} {:<12} {}\n", c.name, c.suite.name(), c.paper_ref)).collect();
            emit(&rows)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Model { spec } => {
            let m = checks::load_model(&spec)?;
            emit(&(serde_json::to_string_pretty(&m.descriptor())? + "\n"))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}
