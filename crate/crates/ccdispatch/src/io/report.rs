//! Rendering and pass/fail judgement of a Monte Carlo security report.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::DispatchProblem;
use crate::validation::{ConstraintFamily, SecurityReport, ViolationEntry};

fn family_budget(problem: &DispatchProblem, family: ConstraintFamily) -> f64 {
    match family {
        ConstraintFamily::AgcCapacity => problem.risk.delta,
        ConstraintFamily::AgcRamp => problem.risk.beta,
        ConstraintFamily::Reserve => problem.risk.epsilon,
        ConstraintFamily::Transmission => problem.risk.eta,
    }
}

/// Whether an observed rate is consistent with its design budget: the
/// excess over the budget must stay within three standard errors of the
/// budgeted binomial rate.
fn entry_passes(entry: &ViolationEntry, budget: f64, n: usize) -> bool {
    let se0 = (budget * (1.0 - budget) / n as f64).sqrt();
    entry.rate <= budget + 3.0 * se0
}

/// True when every measured violation rate is consistent with its budget.
pub fn report_passes(problem: &DispatchProblem, report: &SecurityReport) -> bool {
    report
        .violations
        .iter()
        .all(|e| entry_passes(e, family_budget(problem, e.family), report.scenarios))
}

fn family_label(family: ConstraintFamily) -> &'static str {
    match family {
        ConstraintFamily::AgcCapacity => "agc-capacity",
        ConstraintFamily::AgcRamp => "agc-ramp",
        ConstraintFamily::Reserve => "reserve",
        ConstraintFamily::Transmission => "transmission",
    }
}

/// Plain-text report: security indexes, cost estimate, the worst entry of
/// each constraint family, and the verdict.
pub fn render_report(problem: &DispatchProblem, report: &SecurityReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("scenarios: {}\n", report.scenarios));
    match &report.ramping {
        Some(r) => {
            let per: Vec<String> = r.per_transition.iter().map(|v| format!("{v:.4}")).collect();
            out.push_str(&format!(
                "ramping security index: {:.4} (per transition: {})\n",
                r.average,
                per.join(" ")
            ));
        }
        None => out.push_str("ramping security index: not applicable (single period)\n"),
    }
    out.push_str(&format!(
        "transmission security index: {:.4}\n",
        report.transmission.overall
    ));
    out.push_str(&format!(
        "expected cost: generation {:.2} + corrective {:.2} (se {:.2})\n",
        report.cost.generation, report.cost.corrective_mean, report.cost.corrective_std_error
    ));
    for family in [
        ConstraintFamily::AgcCapacity,
        ConstraintFamily::AgcRamp,
        ConstraintFamily::Reserve,
        ConstraintFamily::Transmission,
    ] {
        let entries: Vec<&ViolationEntry> = report
            .violations
            .iter()
            .filter(|e| e.family == family)
            .collect();
        let budget = family_budget(problem, family);
        match entries.iter().max_by(|a, b| a.rate.total_cmp(&b.rate)) {
            Some(worst) => out.push_str(&format!(
                "{}: {} rows, worst {} rate {:.4} (budget {:.4}, se {:.4})\n",
                family_label(family),
                entries.len(),
                worst.name,
                worst.rate,
                budget,
                worst.std_error
            )),
            None => out.push_str(&format!("{}: no monitored rows\n", family_label(family))),
        }
    }
    out.push_str(&format!(
        "verdict: {}\n",
        if report_passes(problem, report) {
            "PASS"
        } else {
            "FAIL"
        }
    ));
    out
}

/// Writes the full report as CSV with columns `record,family,name,value,std_error`.
///
/// `meta` rows carry the scenario count, `index` rows the ramping and
/// transmission security indexes, `cost` rows the objective breakdown, and
/// one `rate` row per monitored constraint.
pub fn write_report_csv<W: Write>(report: &SecurityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(format!("report csv: {e}"));
    w.write_record(["record", "family", "name", "value", "std_error"])
        .map_err(io)?;
    w.write_record(["meta", "run", "scenarios", &report.scenarios.to_string(), ""])
        .map_err(io)?;
    if let Some(r) = &report.ramping {
        w.write_record(["index", "ramping", "average", &r.average.to_string(), ""])
            .map_err(io)?;
        for (i, v) in r.per_transition.iter().enumerate() {
            let name = format!("t{}", i + 2);
            w.write_record(["index", "ramping", &name, &v.to_string(), ""])
                .map_err(io)?;
        }
    }
    w.write_record([
        "index",
        "transmission",
        "overall",
        &report.transmission.overall.to_string(),
        "",
    ])
    .map_err(io)?;
    w.write_record(["cost", "objective", "generation", &report.cost.generation.to_string(), ""])
        .map_err(io)?;
    w.write_record([
        "cost",
        "objective",
        "corrective",
        &report.cost.corrective_mean.to_string(),
        &report.cost.corrective_std_error.to_string(),
    ])
    .map_err(io)?;
    for e in &report.violations {
        w.write_record([
            "rate",
            family_label(e.family),
            &e.name,
            &e.rate.to_string(),
            &e.std_error.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io(format!("report csv: {e}")))
}
