use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use netmech::bench::repro::{dns_example, los_example};
use netmech::bench::suites::{default_seeds, run_suite, SuiteRow, SUITES};
use netmech::bench::{emit_csv, run_scenario, Scenario};

#[derive(Parser)]
#[command(name = "netmech", version, about = "Auctions over social networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write one CSV row per run.
    Run {
        scenario: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Record wall time per run (makes the CSV non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Run a property suite and print a summary table.
    Check {
        /// Suite name, or `all`.
        suite: String,
        /// Number of seeded instances (repeats for `ordering`).
        #[arg(long)]
        seeds: Option<usize>,
        /// Print the rows as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Replay a worked example.
    Repro {
        #[arg(value_enum)]
        example: Example,
    },
}

#[derive(Copy, Clone, ValueEnum)]
enum Example {
    Proposition,
    LosExample,
}

fn print_table(rows: &[SuiteRow]) {
    println!(
        "{:<16} {:<40} {:>9} {:>9} {:>8} {:>9}  note",
        "suite", "target", "instances", "checked", "failures", "verdict"
    );
    for r in rows {
        println!(
            "{:<16} {:<40} {:>9} {:>9} {:>8} {:>9}  {}",
            r.suite,
            r.target,
            r.instances,
            r.checked,
            r.failures,
            if r.passed { "PASS" } else { "FAIL" },
            r.note
        );
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            output,
            timing,
        } => {
            let mut sc = Scenario::from_file(&scenario)
                .with_context(|| format!("loading {}", scenario.display()))?;
            sc.timing |= timing;
            let records = run_scenario(&sc).context("running scenario")?;
            emit_csv(&records, &output)?;
            eprintln!("wrote {} rows to {}", records.len(), output.display());
            Ok(true)
        }
        Command::Check { suite, seeds, json } => {
            let names: Vec<&str> = if suite == "all" {
                SUITES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let mut rows = Vec::new();
            for name in names {
                let k = seeds.unwrap_or_else(|| default_seeds(name));
                rows.extend(run_suite(name, k)?);
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&rows)?);
            } else {
                print_table(&rows);
            }
            Ok(rows.iter().all(|r| r.passed))
        }
        Command::Repro { example } => match example {
            Example::Proposition => {
                let report = dns_example()?;
                print!("{}", report.render());
                let ok = report.matches_expected();
                println!("verdict: {}", if ok { "reproduced" } else { "MISMATCH" });
                Ok(ok)
            }
            Example::LosExample => {
                let (_, text) = los_example()?;
                print!("{text}");
                Ok(true)
            }
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
