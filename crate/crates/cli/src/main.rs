use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cpg_cli::{compare_gamma, load, parse_gammas, run_to_csv, validate, CliError};

/// Bounded-output CPG scenario runner. Set CPG_LOG=info or debug for logs.
#[derive(Parser)]
#[command(name = "cpg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario, writing the per-step trace as CSV and a JSON summary.
    Run {
        scenario: PathBuf,
        /// CSV output path.
        #[arg(short, long)]
        output: PathBuf,
        /// Summary path; defaults to the CSV path with a `.summary.json` suffix.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Override the scenario's phase coupling γ.
        #[arg(long)]
        gamma: Option<f64>,
    },
    /// Check a scenario and print the feasibility report of every motion.
    Validate { scenario: PathBuf },
    /// Run a scenario once per γ and print the summaries.
    CompareGamma {
        scenario: PathBuf,
        /// Comma-separated γ values.
        #[arg(long, default_value = "0,10")]
        gammas: String,
    },
}

fn summary_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_stem().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    csv.with_file_name(name)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), CliError> {
    println!(
        "{}",
        serde_json::to_string_pretty(value).map_err(std::io::Error::from)?
    );
    Ok(())
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenario,
            output,
            summary,
            gamma,
        } => {
            let sc = load(&scenario)?;
            let out = BufWriter::new(File::create(&output)?);
            let result = run_to_csv(&sc, gamma, out)?;
            let path = summary.unwrap_or_else(|| summary_path(&output));
            std::fs::write(
                &path,
                serde_json::to_string_pretty(&result).map_err(std::io::Error::from)? + "\n",
            )?;
            log::info!("wrote {} and {}", output.display(), path.display());
            print_json(&result)
        }
        Command::Validate { scenario } => {
            let sc = load(&scenario)?;
            print_json(&validate(&sc))
        }
        Command::CompareGamma { scenario, gammas } => {
            let gammas = parse_gammas(&gammas)?;
            let sc = load(&scenario)?;
            let summaries = compare_gamma(&sc, &gammas)?;
            for s in &summaries {
                let first = s.segments.first().and_then(|seg| seg.convergence_time);
                log::info!(
                    "gamma {}: first segment converged after {first:?} s",
                    s.gamma
                );
            }
            print_json(&summaries)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CPG_LOG", "warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
