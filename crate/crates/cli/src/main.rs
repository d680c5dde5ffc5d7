//! `pliag`: run configured experiments, print the rate table, run the
//! bundled verification suites.
//!
//! Exit codes: 0 pass, 2 certificate failure, 1 error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pliag::commands::{self, EXIT_ERROR, EXIT_PASS};

#[derive(Debug, Parser)]
#[command(name = "pliag", version, about = "PLIAG solver with convergence certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a configuration; writes the trace CSV and the report JSON.
    Run {
        config: PathBuf,
    },
    /// Print both linear rate factors for every (Q, tau) pair as CSV.
    Rates {
        /// Condition numbers, comma separated (each >= 1).
        #[arg(long = "q", value_delimiter = ',', num_args = 1.., required = true)]
        q: Vec<f64>,
        /// Delay bounds, comma separated; `a..b` is the inclusive range.
        #[arg(long = "tau", value_delimiter = ',', num_args = 1.., required = true)]
        tau: Vec<String>,
        /// Write the table here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a bundled suite: kernels, descent, sublinear, linear, holder,
    /// recursion or appendixB. Prints a JSON summary.
    Verify {
        suite: String,
    },
}

fn parse_taus(items: &[String]) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in items {
        let bad = || format!("bad tau `{item}`");
        match item.split_once("..") {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(item.trim().parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

fn dispatch(command: Command) -> Result<i32, String> {
    match command {
        Command::Run { config } => {
            let report = commands::cmd_run(&config).map_err(|e| e.to_string())?;
            for cert in &report.certificates {
                println!(
                    "{:?}: {} (max violation {:e})",
                    cert.kind,
                    if cert.pass { "pass" } else { "FAIL" },
                    cert.max_violation
                );
            }
            if let Some(k) = report.guard_tripped {
                println!("divergence guard tripped at iteration {k}");
            }
            Ok(report.exit_code())
        }
        Command::Rates { q, tau, out } => {
            let taus = parse_taus(&tau)?;
            let table = commands::cmd_rates(&q, &taus).map_err(|e| e.to_string())?;
            match out {
                Some(path) => std::fs::write(&path, table).map_err(|e| format!("{}: {e}", path.display()))?,
                None => print!("{table}"),
            }
            Ok(EXIT_PASS)
        }
        Command::Verify { suite } => {
            let summary = commands::cmd_verify(&suite).map_err(|e| e.to_string())?;
            let json = pliag::verify::summary_json(&summary).map_err(|e| e.to_string())?;
            println!("{json}");
            Ok(if summary.pass { EXIT_PASS } else { EXIT_ERROR })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
