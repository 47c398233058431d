use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drift_cli::experiment::{closed_form_oracle, run_experiment, ORACLE_STATES};
use drift_cli::params::Params;
use drift_cli::report::{emit_report, write_csv, Format};
use drift_cli::spec::{process_from_spec, EXPLORE_LIMIT};
use drift_cli::suite::{acceptance_criterion, run_suite, SuiteOutcome};
use drift_cli::theorems::{evaluate, Defaults};
use drift_cli::{with_process, CliError, Result};
use drift_core::montecarlo::{default_cap, simulate_hitting};
use drift_core::oracle::hitting_time_exact;
use drift_core::process::to_finite_chain;

/// Compare drift-theorem bounds with exact and simulated hitting times.
#[derive(Parser)]
#[command(name = "drift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and print its comparison table as CSV.
    Run { config: PathBuf },
    /// Run a built-in suite: `quick` or `paper_acceptance`.
    Suite {
        name: String,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Run only this acceptance criterion (1 to 15).
        #[arg(long)]
        only: Option<u32>,
    },
    /// Evaluate one theorem's bound from `key=value` parameters.
    Bound {
        id: String,
        #[arg(long, value_name = "KEY=VALUE", num_args = 0..)]
        params: Vec<String>,
    },
    /// Exact expected hitting time of a process, e.g. `coupon(n=20)`.
    Oracle { process: String },
    /// Simulated hitting time of a process.
    Simulate {
        process: String,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        cap: Option<u64>,
    },
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("DRIFT_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Invalid(format!("DRIFT_THREADS must be a positive integer, got '{raw}'")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("values serialize"));
}

/// Exit status: 0 when nothing is violated, 1 otherwise.
fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match cli.command {
        Command::Run { config } => {
            let result = run_experiment(&config)?;
            let mut out = std::io::stdout().lock();
            write_csv(&result.rows, &mut out).map_err(|e| CliError::Invalid(e.to_string()))?;
            out.flush().ok();
            Ok(u8::from(result.any_violated()))
        }
        Command::Suite { name, csv, json, only } => {
            let outcome = match only {
                None => run_suite(&name)?,
                Some(_) if name != "paper_acceptance" => {
                    return Err(CliError::Invalid("--only applies to paper_acceptance".into()))
                }
                Some(n) => SuiteOutcome {
                    name,
                    criteria: vec![acceptance_criterion(n)?],
                },
            };
            for c in &outcome.criteria {
                println!("{}", c.status_line());
            }
            let rows = outcome.rows();
            if let Some(path) = csv {
                emit_report(&rows, Format::Csv, &path)?;
            }
            if let Some(path) = json {
                emit_report(&rows, Format::Json, &path)?;
            }
            Ok(outcome.exit_code() as u8)
        }
        Command::Bound { id, params } => {
            let params = Params::from_pairs(format!("theorem {id}"), params.iter().map(String::as_str))?;
            let evaluated = evaluate(&id, &params, &Defaults::default())?;
            print_json(&evaluated.report);
            Ok(0)
        }
        Command::Oracle { process } => {
            let handle = process_from_spec(&process)?;
            let value = match closed_form_oracle(&handle)? {
                Some(v) => v,
                None => with_process!(&handle, p => {
                    let explored = to_finite_chain(p, EXPLORE_LIMIT)?;
                    if explored.chain.len() > ORACLE_STATES {
                        return Err(CliError::Invalid(format!(
                            "{} states; the exact solver is limited to {ORACLE_STATES}",
                            explored.chain.len()
                        )));
                    }
                    hitting_time_exact(&explored.chain)?.from_start
                }),
            };
            println!("{value}");
            Ok(0)
        }
        Command::Simulate { process, trials, seed, cap } => {
            let handle = process_from_spec(&process)?;
            let cap = cap.unwrap_or_else(|| default_cap(None));
            let stats = with_process!(&handle, p => simulate_hitting(p, trials, seed, cap))?;
            print_json(&stats);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
