//! Solve the bundled six-bus system and print the schedule.
//!
//! This is the end-to-end happy path: load a system file, convert every
//! chance constraint to its deterministic row, solve the convex program,
//! and read the result back as per-period unit outputs. The same flow sits
//! behind `ccdispatch dispatch --system data/six_bus.json`.
//!
//! ```bash
//! cargo run --example dispatch_six_bus
//! ```

use std::path::Path;

use ccdispatch::io::{load_system, run_dispatch, DispatchFlags};
use ccdispatch::Result;

fn main() -> Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/six_bus.json");
    let problem = load_system(&path)?;
    println!(
        "system: {} buses, {} lines, {} non-AGC + {} AGC units, {} wind farms, {} periods of {} min",
        problem.grid.bus_count(),
        problem.grid.lines().len(),
        problem.non_agc.len(),
        problem.agc.len(),
        problem.wind_farms.len(),
        problem.periods(),
        problem.horizon.period_minutes,
    );

    let out = run_dispatch(&problem, &DispatchFlags::default())?;
    println!(
        "solved in {} Newton iterations, objective {:.4} $",
        out.solution.newton_iterations, out.solution.objective
    );
    println!(
        "cost split: generation {:.4} + expected regulation {:.4}",
        out.cost.generation, out.cost.corrective
    );

    // Per-period summary: scheduled totals and the wind commitment.
    println!("\nperiod  non-AGC total  AGC total  scheduled wind  forecast wind");
    for t in 0..problem.periods() {
        let non_agc: f64 = out.schedule.non_agc[t].iter().sum();
        let agc: f64 = out.schedule.agc[t].iter().sum();
        let forecast: f64 = problem.forecasts[t].distribution.location().iter().sum();
        println!(
            "{:>6}  {:>13.2}  {:>9.2}  {:>14.2}  {:>13.2}",
            t + 1,
            non_agc,
            agc,
            out.schedule.total_wind[t],
            forecast,
        );
    }

    // The constraints that actually shaped the schedule: rows with a
    // meaningful multiplier at the optimum.
    let mut binding: Vec<(&str, f64)> = out
        .solution
        .inequality_duals
        .iter()
        .filter(|(_, dual)| *dual > 5e-2)
        .map(|(name, dual)| (name.as_str(), *dual))
        .collect();
    binding.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("\nstrongest binding rows (dual > 0.05, top 12 of {}):", binding.len());
    for (name, dual) in binding.iter().take(12) {
        println!("  {name:<28} {dual:>10.4}");
    }
    Ok(())
}
