use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use decolab::config::OutputFormat;
use decolab::{compare_regimes, parse_config, run, CliError, RunConfig, Verification};

/// Decoherence of cat states and spin relaxation in thermal reservoirs.
#[derive(Parser)]
#[command(name = "decolab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a configuration and write its data files.
    Run {
        config: PathBuf,
        /// Run the oracle checks alongside the analytic output.
        #[arg(long)]
        verify: bool,
        /// Output directory, overriding the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<OutputFormat>,
    },
    /// Tabulate the entangled and initially decoupled high-temperature attenuation.
    CompareRegimes {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full oracle suite.
    Selftest,
}

fn load(path: &Path, out: Option<PathBuf>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut config = parse_config(&text)?;
    if let Some(out) = out {
        config.output_dir = out;
    }
    Ok(config)
}

fn print_checks(v: &Verification) {
    for c in &v.checks {
        println!(
            "[{}] {}: max deviation {:e} (tolerance {:e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.max_deviation,
            c.tolerance
        );
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run { config, verify, out, format } => {
            let mut config = load(&config, out)?;
            config.verify |= verify;
            if let Some(format) = format {
                config.format = format;
            }
            let report = run(&config)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for f in &report.files_written {
                println!("wrote {}", config.output_dir.join(f).display());
            }
            if let Some(v) = &report.verification {
                print_checks(v);
            }
            Ok(report.passed())
        }
        Command::CompareRegimes { config, out } => {
            let config = load(&config, out)?;
            println!("wrote {}", compare_regimes(&config)?.display());
            Ok(true)
        }
        Command::Selftest => {
            let v = decolab::selftest::selftest()?;
            print_checks(&v);
            Ok(v.passed())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
