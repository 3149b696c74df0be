//! Command-line driver for the rod solver: scenario files, runs, parameter
//! sweeps, verification suites and plot-data export.

pub mod config;
pub mod error;
pub mod export;
pub mod run;
pub mod snapshot;
pub mod sweep;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use snake_core::se3::Twist;
use snake_core::validation::suites::{self, Suite, SuiteReport};

pub use config::Scenario;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "snake", version, about = "Geometrically exact snake-like rod simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario (or re-run a manifest).
    Run { scenario: PathBuf },
    /// Run verification suites; all of them when none are named.
    Verify {
        suites: Vec<String>,
        /// Flip the sign of the linear part of the bracket, to check that the
        /// algebra and connection suites catch it.
        #[arg(long, hide = true)]
        inject_bracket_error: bool,
    },
    /// Run a scenario over one or two parameter axes.
    Sweep {
        scenario: PathBuf,
        /// `key=start:stop:n`, e.g. `control.amplitude=0:0.1:3`.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
    },
    /// Write column files for plotting from a run directory.
    Export {
        rundir: PathBuf,
        /// Number of centreline snapshots to export.
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
}

fn flipped_bracket(a: &Twist<f64>, b: &Twist<f64>) -> Twist<f64> {
    let c = a.bracket(b);
    Twist::new(c.angular, -c.linear)
}

fn verify(names: &[String], inject: bool) -> Result<(), CliError> {
    let selected: Vec<Suite> = if names.is_empty() {
        Suite::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|n| {
                Suite::from_name(n).ok_or_else(|| {
                    let all: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                    CliError::Config(format!("unknown suite {n:?}; available: {}", all.join(", ")))
                })
            })
            .collect::<Result<_, _>>()?
    };
    let mut failed = Vec::new();
    for s in selected {
        let report: SuiteReport = match (s, inject) {
            (Suite::Algebra, true) => suites::algebra_suite(flipped_bracket)?,
            (Suite::Connection, true) => suites::connection_suite(flipped_bracket)?,
            _ => suites::run_suite(s)?,
        };
        print!("{report}");
        if !report.passed() {
            failed.push(s.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario } => {
            let s = run::load_input(&scenario)?;
            let dir = run::output_dir(&s);
            let r = run::run_scenario(&s, &dir)?;
            println!(
                "{} steps of {:e} s, {} outputs in {}; energy {:e} -> {:e} J",
                r.n_steps,
                r.dt,
                r.outputs,
                r.directory.display(),
                r.initial_energy,
                r.final_energy
            );
            Ok(())
        }
        Command::Verify { suites, inject_bracket_error } => verify(&suites, inject_bracket_error),
        Command::Sweep { scenario, axes } => {
            let s = run::load_input(&scenario)?;
            let axes: Vec<sweep::Axis> = axes.iter().map(|a| a.parse()).collect::<Result<_, _>>()?;
            let out = sweep::sweep(&s, &axes)?;
            print!("{}", sweep::summary_table(&axes, &out.points));
            println!("summary written to {}", out.summary_path.display());
            // Report the first failure; every point has already been attempted.
            match out.points.into_iter().find_map(|(_, r)| r.err()) {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Export { rundir, count } => {
            let e = export::export(&rundir, count)?;
            println!(
                "{} energy rows and {} centreline files in {}",
                e.energy_rows,
                e.centerline_files.len(),
                e.directory.display()
            );
            Ok(())
        }
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("snake: {e}");
            e.exit_code()
        }
    }
}
