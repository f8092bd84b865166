//! One driver per subcommand, plus the rolling-horizon loop.

use std::io::Read;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cauchy::fit_mv_cauchy;
use crate::error::{Error, Result};
use crate::model::{
    assemble_with, scheduled_cost, AssembleOptions, CostBreakdown, DispatchProblem,
    DispatchSchedule,
};
use crate::network::{build_ptdf, GridModel, LineLimit};
use crate::solver::{solve, Solution, SolveStatus, SolverOptions};
use crate::validation::{assess, ScenarioSet, SecurityReport};

use super::report_passes;

/// Modeling switches shared by the solve-based subcommands.
#[derive(Debug, Clone, Copy)]
pub struct DispatchFlags {
    /// Multiplies every risk level; 0.5 doubles protection, 2.0 halves it.
    pub risk_scale: f64,
    /// When false, ramp rows keep their shape but drop the probabilistic
    /// margin that accounts for the AGC response between periods.
    pub stochastic_agc_ramps: bool,
    /// When false, line rows ignore the AGC response to wind misses.
    pub affine_line_recourse: bool,
}

impl Default for DispatchFlags {
    fn default() -> Self {
        Self {
            risk_scale: 1.0,
            stochastic_agc_ramps: true,
            affine_line_recourse: true,
        }
    }
}

/// A solved dispatch: the (possibly risk-rescaled) problem, the raw solver
/// output, the decoded schedule, and its cost split.
pub struct DispatchOutcome {
    pub problem: DispatchProblem,
    pub solution: Solution,
    pub schedule: DispatchSchedule,
    pub cost: CostBreakdown,
}

/// Assembles and solves one dispatch problem.
pub fn run_dispatch(problem: &DispatchProblem, flags: &DispatchFlags) -> Result<DispatchOutcome> {
    let mut problem = problem.clone();
    if flags.risk_scale != 1.0 {
        problem.risk = problem
            .risk
            .scaled(flags.risk_scale)
            .map_err(|e| Error::InvalidProblem(format!("risk scale: {e}")))?;
    }
    let options = AssembleOptions {
        affine_line_recourse: flags.affine_line_recourse,
        stochastic_agc_ramps: flags.stochastic_agc_ramps,
    };
    let model = assemble_with(&problem, options)?;
    let solution = solve(&model.program, &SolverOptions::default())?;
    match &solution.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible { violated_rows } => {
            return Err(Error::Infeasible(violated_rows.clone()))
        }
        SolveStatus::IterationLimit => {
            return Err(Error::Numerical(
                "iteration limit before convergence".into(),
            ))
        }
    }
    let schedule = model.layout.schedule_from(&solution.x);
    let cost = scheduled_cost(&problem, &schedule)?;
    Ok(DispatchOutcome {
        problem,
        solution,
        schedule,
        cost,
    })
}

/// A Monte Carlo assessment plus its verdict.
pub struct ValidateOutcome {
    pub report: SecurityReport,
    pub passed: bool,
}

/// Samples scenarios and assesses a schedule against the original
/// probabilistic statements.
pub fn run_validate(
    problem: &DispatchProblem,
    schedule: &DispatchSchedule,
    samples: usize,
    seed: u64,
    clip: bool,
) -> Result<ValidateOutcome> {
    let scenarios = if clip {
        ScenarioSet::generate_clipped(problem, samples, seed)?
    } else {
        ScenarioSet::generate(problem, samples, seed)?
    };
    let report = assess(problem, schedule, &scenarios)?;
    let passed = report_passes(problem, &report);
    Ok(ValidateOutcome { report, passed })
}

/// Restricts a problem to periods `start .. start + len`, slicing loads,
/// forecasts, reserves, and per-period line limits.
pub fn slice_problem(problem: &DispatchProblem, start: usize, len: usize) -> Result<DispatchProblem> {
    if len == 0 || start + len > problem.periods() {
        return Err(Error::InvalidProblem(format!(
            "window {start}..{} outside horizon of {} periods",
            start + len,
            problem.periods()
        )));
    }
    let window = |v: &[f64]| v[start..start + len].to_vec();
    let lines = problem
        .grid
        .lines()
        .iter()
        .map(|l| {
            let mut line = l.clone();
            if let LineLimit::PerPeriod(profile) = &l.limit {
                line.limit = LineLimit::PerPeriod(window(profile));
            }
            line
        })
        .collect();
    let grid = GridModel::new(problem.grid.bus_count(), lines, problem.grid.slack_bus())?;
    let mut sliced = problem.clone();
    sliced.grid = grid;
    sliced.horizon.periods = len;
    sliced.loads = problem.loads[start..start + len].to_vec();
    sliced.forecasts = problem.forecasts[start..start + len].to_vec();
    sliced.reserve_up = window(&problem.reserve_up);
    sliced.reserve_down = window(&problem.reserve_down);
    Ok(sliced)
}

/// The committed trajectory of a receding-horizon run.
pub struct RollingOutcome {
    /// First-period decisions of each window, stitched into one schedule.
    pub committed: DispatchSchedule,
    /// Optimal objective of each window's look-ahead problem.
    pub objectives: Vec<f64>,
    pub window_length: usize,
}

/// Receding-horizon dispatch: solve a `window_length`-period look-ahead,
/// commit its first period, advance one period with the committed outputs
/// as the new ramp anchors, and repeat `windows` times.
pub fn run_rolling(
    problem: &DispatchProblem,
    windows: usize,
    window_length: Option<usize>,
    flags: &DispatchFlags,
) -> Result<RollingOutcome> {
    if windows == 0 {
        return Err(Error::InvalidProblem("need at least one window".into()));
    }
    let len = match window_length {
        Some(l) => l,
        None => (problem.periods() + 1).saturating_sub(windows),
    };
    if len == 0 || windows - 1 + len > problem.periods() {
        return Err(Error::InvalidProblem(format!(
            "{windows} windows of {len} periods do not fit a {}-period file",
            problem.periods()
        )));
    }
    let mut initial_non_agc = problem.horizon.initial_non_agc.clone();
    let mut initial_agc = problem.horizon.initial_agc.clone();
    let mut committed = DispatchSchedule {
        non_agc: Vec::with_capacity(windows),
        agc: Vec::with_capacity(windows),
        wind: Vec::with_capacity(windows),
        total_wind: Vec::with_capacity(windows),
    };
    let mut objectives = Vec::with_capacity(windows);
    for w in 0..windows {
        let mut sub = slice_problem(problem, w, len)?;
        sub.horizon.initial_non_agc = initial_non_agc.clone();
        sub.horizon.initial_agc = initial_agc.clone();
        let outcome = run_dispatch(&sub, flags)?;
        initial_non_agc = outcome.schedule.non_agc[0].clone();
        initial_agc = outcome.schedule.agc[0].clone();
        committed.non_agc.push(outcome.schedule.non_agc[0].clone());
        committed.agc.push(outcome.schedule.agc[0].clone());
        committed.wind.push(outcome.schedule.wind[0].clone());
        committed.total_wind.push(outcome.schedule.total_wind[0]);
        objectives.push(outcome.solution.objective);
    }
    Ok(RollingOutcome {
        committed,
        objectives,
        window_length: len,
    })
}

/// A fitted forecast-error model in file form.
#[derive(Debug, Clone, Serialize)]
pub struct FitOutcome {
    pub location: Vec<f64>,
    pub scale: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitOutcome {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("fit outcome serializes")
    }
}

/// Reads numeric sample rows (one sample per line, one column per farm;
/// an optional header line is skipped) and fits the heavy-tailed model.
pub fn run_fit<R: Read>(input: R, tolerance: f64, max_iterations: usize) -> Result<FitOutcome> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("samples csv: {e}")))?;
        let parsed: std::result::Result<Vec<f64>, _> =
            rec.iter().map(|f| f.trim().parse::<f64>()).collect();
        match parsed {
            Ok(row) => {
                if let Some(first) = rows.first() {
                    if row.len() != first.len() {
                        return Err(Error::Parse(format!(
                            "samples csv: line {} has {} columns, expected {}",
                            i + 1,
                            row.len(),
                            first.len()
                        )));
                    }
                }
                rows.push(row);
            }
            Err(_) if i == 0 => continue, // header line
            Err(e) => {
                return Err(Error::Parse(format!("samples csv: line {}: {e}", i + 1)))
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse("samples csv: no numeric rows".into()));
    }
    let k = rows[0].len();
    let samples = DMatrix::from_fn(rows.len(), k, |r, c| rows[r][c]);
    let fit = fit_mv_cauchy(&samples, tolerance, max_iterations)?;
    let loc = fit.distribution.location();
    let sc = fit.distribution.scale();
    Ok(FitOutcome {
        location: loc.iter().copied().collect(),
        scale: (0..k)
            .map(|r| (0..k).map(|c| sc[(r, c)]).collect())
            .collect(),
        log_likelihood: fit.log_likelihood,
        iterations: fit.iterations,
        converged: fit.converged,
    })
}

/// Renders the grid's injection-to-flow sensitivities as CSV: one row per
/// line, one column per bus.
pub fn run_ptdf(problem: &DispatchProblem) -> Result<String> {
    let ptdf = build_ptdf(&problem.grid)?;
    let buses = problem.grid.bus_count();
    let mut out = String::from("line,from,to");
    for b in 0..buses {
        out.push_str(&format!(",bus{b}"));
    }
    out.push('\n');
    for (l, line) in problem.grid.lines().iter().enumerate() {
        out.push_str(&format!("{}-{},{},{}", line.from, line.to, line.from, line.to));
        for b in 0..buses {
            out.push_str(&format!(",{}", ptdf.factor(l, b)));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Process exit code for an error: 2 for infeasible models, 4 for broken
/// input, 1 for internal numerical trouble.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => 2,
        Error::Io(_)
        | Error::Parse(_)
        | Error::InvalidProblem(_)
        | Error::Domain(_)
        | Error::DimensionMismatch { .. }
        | Error::InsufficientData { .. }
        | Error::Islanded(_)
        | Error::Unbalanced(_)
        | Error::NotPositiveDefinite(_)
        | Error::Degenerate(_) => 4,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::small_problem;
    use approx::assert_relative_eq;

    #[test]
    fn dispatch_driver_solves_and_prices_the_fixture() {
        let p = small_problem();
        let out = run_dispatch(&p, &DispatchFlags::default()).unwrap();
        assert!(out.solution.is_optimal());
        assert_relative_eq!(
            out.cost.total(),
            out.solution.objective,
            max_relative = 1e-6
        );
        assert_eq!(out.schedule.periods(), 2);
    }

    #[test]
    fn risk_scaling_trades_cost_for_protection() {
        let p = small_problem();
        let base = run_dispatch(&p, &DispatchFlags::default()).unwrap();
        let tighter = run_dispatch(
            &p,
            &DispatchFlags {
                risk_scale: 0.9,
                ..DispatchFlags::default()
            },
        )
        .unwrap();
        // Lowering every acceptable violation probability shrinks the
        // feasible set, so the optimum cannot get cheaper.
        assert!(tighter.solution.objective >= base.solution.objective - 1e-7);
        // Far enough down, the probabilistic ramp bands become empty and
        // the driver reports the blocking rows instead of a schedule.
        let too_tight = run_dispatch(
            &p,
            &DispatchFlags {
                risk_scale: 0.5,
                ..DispatchFlags::default()
            },
        );
        match too_tight {
            Err(Error::Infeasible(rows)) => {
                assert!(rows.iter().all(|r| r.starts_with("agc-ramp")), "{rows:?}")
            }
            other => panic!("expected infeasibility, got {:?}", other.map(|o| o.cost)),
        }
        let silly = run_dispatch(
            &p,
            &DispatchFlags {
                risk_scale: 20.0,
                ..DispatchFlags::default()
            },
        );
        assert!(matches!(silly, Err(Error::InvalidProblem(_))));
    }

    #[test]
    fn validate_driver_passes_an_optimized_schedule() {
        let p = small_problem();
        let out = run_dispatch(&p, &DispatchFlags::default()).unwrap();
        let v = run_validate(&p, &out.schedule, 20_000, 7, false).unwrap();
        assert!(v.passed, "optimized schedule should satisfy every budget");
        assert_eq!(v.report.scenarios, 20_000);
    }

    #[test]
    fn slicing_restricts_every_per_period_field() {
        let mut p = small_problem();
        // Give one line a per-period profile to exercise its slicing.
        let mut lines = p.grid.lines().to_vec();
        lines[1].limit = LineLimit::PerPeriod(vec![80.0, 85.0]);
        p.grid = GridModel::new(3, lines, 0).unwrap();
        let s = slice_problem(&p, 1, 1).unwrap();
        assert_eq!(s.periods(), 1);
        assert_eq!(s.loads, vec![vec![55.0, 95.0, 70.0]]);
        assert_eq!(s.reserve_up, vec![20.0]);
        assert_relative_eq!(s.grid.lines()[1].limit.at(0), 85.0);
        assert_relative_eq!(
            s.forecasts[0].distribution.location()[0],
            p.forecasts[1].distribution.location()[0]
        );
        assert!(slice_problem(&p, 1, 2).is_err());
    }

    fn stationary_problem(periods: usize) -> DispatchProblem {
        let mut p = small_problem();
        p.horizon.periods = periods;
        p.loads = vec![p.loads[0].clone(); periods];
        p.forecasts = vec![p.forecasts[0].clone(); periods];
        p.reserve_up = vec![p.reserve_up[0]; periods];
        p.reserve_down = vec![p.reserve_down[0]; periods];
        p
    }

    #[test]
    fn rolling_converges_on_stationary_data() {
        let p = stationary_problem(16);
        let out = run_rolling(&p, 12, Some(4), &DispatchFlags::default()).unwrap();
        assert_eq!(out.committed.periods(), 12);
        assert_eq!(out.objectives.len(), 12);
        // With identical data in every period the committed decisions
        // settle to a fixed point once the initial conditions (which the
        // ramp anchors can only unwind one period's room at a time) wash
        // out.
        for j in 0..p.agc.len() {
            assert_relative_eq!(
                out.committed.agc[10][j],
                out.committed.agc[11][j],
                epsilon = 1e-3
            );
        }
        for i in 0..p.non_agc.len() {
            assert_relative_eq!(
                out.committed.non_agc[10][i],
                out.committed.non_agc[11][i],
                epsilon = 1e-3
            );
        }
        // Early windows are still working off the initial conditions.
        assert!((out.committed.agc[0][0] - out.committed.agc[11][0]).abs() > 1.0);
        // The default window length uses the whole file.
        let full = run_rolling(&p, 5, None, &DispatchFlags::default()).unwrap();
        assert_eq!(full.window_length, 12);
    }

    #[test]
    fn fit_driver_reads_headers_and_plain_csv() {
        use crate::cauchy::MultivariateCauchy;
        use nalgebra::{DMatrix as M, DVector as V};
        let truth = MultivariateCauchy::new(
            V::from_row_slice(&[1.0, -2.0]),
            M::from_row_slice(2, 2, &[0.8, 0.3, 0.3, 0.5]),
        )
        .unwrap();
        let samples = truth.sample(4000, 99);
        let mut plain = String::new();
        let mut with_header = String::from("err_w1,err_w2\n");
        for r in 0..samples.nrows() {
            let line = format!("{},{}\n", samples[(r, 0)], samples[(r, 1)]);
            plain.push_str(&line);
            with_header.push_str(&line);
        }
        let a = run_fit(plain.as_bytes(), 1e-10, 300).unwrap();
        let b = run_fit(with_header.as_bytes(), 1e-10, 300).unwrap();
        assert!(a.converged);
        assert_eq!(a.location, b.location);
        assert_relative_eq!(a.location[0], 1.0, epsilon = 0.1);
        assert_relative_eq!(a.location[1], -2.0, epsilon = 0.1);
        let garbage = "1.0,2.0\n3.0,oops\n";
        assert!(matches!(
            run_fit(garbage.as_bytes(), 1e-10, 50),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn ptdf_csv_has_one_row_per_line() {
        let p = small_problem();
        let text = run_ptdf(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "line,from,to,bus0,bus1,bus2");
        assert!(lines[1].starts_with("0-1,0,1,"));
        // Slack-bus column is zero by construction.
        let cells: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(cells[3].parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn exit_codes_separate_input_model_and_numerics() {
        assert_eq!(exit_code(&Error::Infeasible(vec!["r".into()])), 2);
        assert_eq!(exit_code(&Error::Parse("x".into())), 4);
        assert_eq!(exit_code(&Error::Io("x".into())), 4);
        assert_eq!(exit_code(&Error::InvalidProblem("x".into())), 4);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 1);
    }
}
