//! Thin command-line front end over the ccdispatch library.

use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ccdispatch::io::{
    exit_code, load_system, read_schedule_csv, render_report, run_dispatch, run_fit, run_ptdf,
    run_rolling, run_validate, write_report_csv, write_schedule_csv, DispatchFlags,
};
use ccdispatch::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ccdispatch",
    version,
    about = "Chance-constrained real-time dispatch under heavy-tailed wind uncertainty"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelFlags {
    /// Multiply every acceptable violation probability by this factor.
    #[arg(long, default_value_t = 1.0)]
    risk_scale: f64,
    /// Drop the probabilistic margins from the AGC ramp rows.
    #[arg(long)]
    no_aprr: bool,
    /// Ignore the AGC response to wind misses in the line rows.
    #[arg(long)]
    no_affine_lines: bool,
}

impl ModelFlags {
    fn to_flags(&self) -> DispatchFlags {
        DispatchFlags {
            risk_scale: self.risk_scale,
            stochastic_agc_ramps: !self.no_aprr,
            affine_line_recourse: !self.no_affine_lines,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one look-ahead dispatch and write the schedule as CSV.
    Dispatch {
        /// System description (JSON).
        #[arg(long)]
        system: PathBuf,
        /// Write the schedule here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Check a schedule against the original probabilistic statements.
    Validate {
        /// System description (JSON).
        #[arg(long)]
        system: PathBuf,
        /// Schedule to assess (CSV, as written by `dispatch`).
        #[arg(long)]
        schedule: PathBuf,
        /// Number of Monte Carlo scenarios.
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        /// Random seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Clamp each farm's realized output to its physical range.
        #[arg(long)]
        clip: bool,
        /// Write the full report here (CSV).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Receding-horizon dispatch: commit the first period of each window.
    Rolling {
        /// System description (JSON) covering the full span.
        #[arg(long)]
        system: PathBuf,
        /// Number of windows to roll through.
        #[arg(long, default_value_t = 4)]
        windows: usize,
        /// Look-ahead length per window (default: fill the file).
        #[arg(long)]
        window_length: Option<usize>,
        /// Write the committed schedule here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Fit the forecast-error model to sample rows (CSV).
    Fit {
        /// Error samples: one row per observation, one column per farm.
        #[arg(long)]
        data: PathBuf,
        /// Relative log-likelihood change declaring convergence.
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Iteration cap.
        #[arg(long, default_value_t = 500)]
        max_iterations: usize,
        /// Write the fitted model here (JSON) instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the line-flow sensitivity matrix of a system (CSV).
    Ptdf {
        /// System description (JSON).
        #[arg(long)]
        system: PathBuf,
        /// Write the matrix here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Writes `text` to `path`, or to stdout when no path is given.
fn deliver(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Dispatch { system, out, model } => {
            let problem = load_system(&system)?;
            let outcome = run_dispatch(&problem, &model.to_flags())?;
            let mut buf = Vec::new();
            write_schedule_csv(&outcome.problem, &outcome.schedule, &mut buf)?;
            deliver(&out, &String::from_utf8(buf).expect("csv is utf-8"))?;
            eprintln!(
                "optimal: objective {:.4} (generation {:.4}, corrective {:.4}), \
                 {} newton iterations",
                outcome.solution.objective,
                outcome.cost.generation,
                outcome.cost.corrective,
                outcome.solution.newton_iterations
            );
            Ok(0)
        }
        Command::Validate {
            system,
            schedule,
            samples,
            seed,
            clip,
            out,
        } => {
            let problem = load_system(&system)?;
            let file = File::open(&schedule)
                .map_err(|e| Error::Io(format!("{}: {e}", schedule.display())))?;
            let sched = read_schedule_csv(&problem, file)?;
            let outcome = run_validate(&problem, &sched, samples, seed, clip)?;
            // Every run is reproducible from (inputs, flags, seed); both the
            // text report and the CSV carry that tuple.
            let provenance = format!(
                "system: {}\nschedule: {}\nseed: {seed}\nclip: {clip}\n",
                system.display(),
                schedule.display()
            );
            if let Some(path) = &out {
                let mut buf = Vec::new();
                write_report_csv(&outcome.report, &mut buf)?;
                let mut text = String::from_utf8(buf).expect("csv is utf-8");
                text.push_str(&format!(
                    "meta,run,system,{},\nmeta,run,schedule,{},\nmeta,run,seed,{seed},\nmeta,run,clip,{clip},\n",
                    system.display(),
                    schedule.display()
                ));
                std::fs::write(path, text)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            print!("{provenance}{}", render_report(&problem, &outcome.report));
            Ok(if outcome.passed { 0 } else { 3 })
        }
        Command::Rolling {
            system,
            windows,
            window_length,
            out,
            model,
        } => {
            let problem = load_system(&system)?;
            let outcome = run_rolling(&problem, windows, window_length, &model.to_flags())?;
            let mut committed_problem = problem.clone();
            committed_problem.horizon.periods = outcome.committed.periods();
            let mut buf = Vec::new();
            write_schedule_csv(&committed_problem, &outcome.committed, &mut buf)?;
            deliver(&out, &String::from_utf8(buf).expect("csv is utf-8"))?;
            let objs: Vec<String> = outcome
                .objectives
                .iter()
                .map(|o| format!("{o:.4}"))
                .collect();
            eprintln!(
                "rolled {} windows of {} periods; objectives: {}",
                windows,
                outcome.window_length,
                objs.join(" ")
            );
            Ok(0)
        }
        Command::Fit {
            data,
            tolerance,
            max_iterations,
            out,
        } => {
            let file = File::open(&data)
                .map_err(|e| Error::Io(format!("{}: {e}", data.display())))?;
            let fit = run_fit(file, tolerance, max_iterations)?;
            deliver(&out, &(fit.to_json_string() + "\n"))?;
            eprintln!(
                "fit {} in {} iterations, log-likelihood {:.4}",
                if fit.converged { "converged" } else { "hit the iteration cap" },
                fit.iterations,
                fit.log_likelihood
            );
            Ok(0)
        }
        Command::Ptdf { system, out } => {
            let problem = load_system(&system)?;
            deliver(&out, &run_ptdf(&problem)?)?;
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
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
