//! What the stochastic constraint terms buy: cost versus delivered security.
//!
//! Two switches strip the model back to its conventional form: one drops
//! the probabilistic margin in the AGC ramp rows, the other drops the AGC
//! response from the line rows. Each relaxation is cheaper on paper. This
//! example solves all three variants of the six-bus system and replays
//! them against the same sampled wind outcomes, so the table shows what
//! the saved dollars cost in delivered security.
//!
//! ```bash
//! cargo run --release --example ablation_comparison
//! ```

use std::path::Path;

use ccdispatch::io::{load_system, report_passes, run_dispatch, DispatchFlags};
use ccdispatch::validation::{assess, ScenarioSet};
use ccdispatch::Result;

fn main() -> Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/six_bus.json");
    let problem = load_system(&path)?;
    let scenarios = ScenarioSet::generate(&problem, 50_000, 77)?;

    let variants: [(&str, DispatchFlags); 3] = [
        ("full model", DispatchFlags::default()),
        (
            "no stochastic AGC ramps",
            DispatchFlags {
                stochastic_agc_ramps: false,
                ..DispatchFlags::default()
            },
        ),
        (
            "no line recourse",
            DispatchFlags {
                affine_line_recourse: false,
                ..DispatchFlags::default()
            },
        ),
    ];

    println!(
        "{:<24} {:>12} {:>10} {:>14} {:>12}  {}",
        "variant", "objective", "ramping", "transmission", "worst rate", "verdict"
    );
    for (label, flags) in &variants {
        let out = run_dispatch(&problem, flags)?;
        let report = assess(&problem, &out.schedule, &scenarios)?;
        let ramping = report
            .ramping
            .as_ref()
            .map(|r| format!("{:.4}", r.average))
            .unwrap_or_else(|| "-".into());
        let worst = report
            .violations
            .iter()
            .max_by(|a, b| a.rate.total_cmp(&b.rate))
            .expect("monitored rows exist");
        let verdict = if report_passes(&problem, &report) { "PASS" } else { "FAIL" };
        println!(
            "{:<24} {:>12.4} {:>10} {:>14.4} {:>7.4} ({})  {}",
            label,
            out.solution.objective,
            ramping,
            report.transmission.overall,
            worst.rate,
            worst.name,
            verdict
        );
    }
    println!(
        "\nthe relaxed variants are cheaper on paper but breach their 0.02 \
         violation budgets in replay; the full model pays the difference \
         and stays within every budget"
    );
    Ok(())
}
