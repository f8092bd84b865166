//! Monte Carlo assessment of a dispatch schedule.
//!
//! Scenarios are drawn from the joint distribution of realized wind across
//! all periods and farms, built block-diagonally from the per-period
//! forecasts. One heavy-tailed mixing draw is shared by the whole horizon
//! of a scenario, which is exactly the dependence the cross-period ramp
//! rows assume; the per-period marginals are unchanged by this coupling.
//! Given scenarios, the module realizes AGC outputs, computes security
//! indexes, measures how often each original probabilistic statement
//! fails, and estimates the regulation cost that the closed-form objective
//! term claims.

use nalgebra::DMatrix;

use crate::cauchy::MultivariateCauchy;
use crate::error::{Error, Result};
use crate::model::{DispatchProblem, DispatchSchedule};
use crate::network::{build_ptdf, PtdfMatrix};

/// Realized wind outputs for `count` scenarios over a whole horizon,
/// stored as one row per scenario with period-major farm columns.
pub struct ScenarioSet {
    samples: DMatrix<f64>,
    periods: usize,
    n_wind: usize,
}

impl ScenarioSet {
    /// Draws `count` horizon scenarios from the joint distribution.
    pub fn generate(problem: &DispatchProblem, count: usize, seed: u64) -> Result<Self> {
        Self::generate_inner(problem, count, seed, false)
    }

    /// Like [`ScenarioSet::generate`], but clamps each farm's output to its
    /// physical range `[0, capacity]`, removing the unphysical tails.
    pub fn generate_clipped(problem: &DispatchProblem, count: usize, seed: u64) -> Result<Self> {
        Self::generate_inner(problem, count, seed, true)
    }

    fn generate_inner(
        problem: &DispatchProblem,
        count: usize,
        seed: u64,
        clip: bool,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let dists: Vec<&MultivariateCauchy> = problem
            .forecasts
            .iter()
            .map(|f| &f.distribution)
            .collect();
        let joint = MultivariateCauchy::block_diagonal(&dists)?;
        let mut samples = joint.sample(count, seed);
        let periods = problem.periods();
        let n_wind = problem.n_wind();
        if clip {
            for t in 0..periods {
                for (k, farm) in problem.wind_farms.iter().enumerate() {
                    let col = t * n_wind + k;
                    for s in 0..count {
                        samples[(s, col)] = samples[(s, col)].clamp(0.0, farm.capacity);
                    }
                }
            }
        }
        Ok(Self {
            samples,
            periods,
            n_wind,
        })
    }

    /// Wraps externally produced scenarios (rows are scenarios, columns are
    /// period-major farm outputs).
    pub fn from_raw(samples: DMatrix<f64>, periods: usize, n_wind: usize) -> Result<Self> {
        if samples.ncols() != periods * n_wind {
            return Err(Error::DimensionMismatch {
                what: "scenario columns",
                expected: periods * n_wind,
                actual: samples.ncols(),
            });
        }
        if samples.nrows() == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        Ok(Self {
            samples,
            periods,
            n_wind,
        })
    }

    pub fn count(&self) -> usize {
        self.samples.nrows()
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    /// Realized output of farm `k` in period `t` under scenario `s`.
    pub fn farm(&self, s: usize, t: usize, k: usize) -> f64 {
        self.samples[(s, t * self.n_wind + k)]
    }

    /// Realized total wind in period `t` under scenario `s`.
    pub fn total(&self, s: usize, t: usize) -> f64 {
        (0..self.n_wind).map(|k| self.farm(s, t, k)).sum()
    }
}

/// Realized AGC outputs under one scenario: each unit moves off its
/// schedule by its share of the total wind miss,
/// `realized = scheduled + alpha (scheduled_wind - realized_wind)`.
pub fn realized_agc(
    problem: &DispatchProblem,
    schedule: &DispatchSchedule,
    scenarios: &ScenarioSet,
    s: usize,
) -> Vec<Vec<f64>> {
    (0..scenarios.periods())
        .map(|t| {
            let miss = schedule.total_wind[t] - scenarios.total(s, t);
            problem
                .agc
                .iter()
                .enumerate()
                .map(|(j, u)| schedule.agc[t][j] + u.alpha * miss)
                .collect()
        })
        .collect()
}

/// Fraction of scenarios in which every AGC unit respects its ramp limits,
/// per within-horizon transition and averaged.
#[derive(Debug, Clone)]
pub struct RampingSecurity {
    /// One entry per transition, from period 1 to 2 onward.
    pub per_transition: Vec<f64>,
    pub average: f64,
}

/// Fraction of scenarios in which every monitored line stays within its
/// limit, per period and jointly over the horizon.
#[derive(Debug, Clone)]
pub struct TransmissionSecurity {
    pub per_period: Vec<f64>,
    pub overall: f64,
}

/// Which protected family a violation-rate entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintFamily {
    AgcCapacity,
    AgcRamp,
    Reserve,
    Transmission,
}

/// Observed failure frequency of one probabilistic statement. Names match
/// the corresponding constraint rows of the model.
#[derive(Debug, Clone)]
pub struct ViolationEntry {
    pub family: ConstraintFamily,
    pub name: String,
    pub rate: f64,
    pub std_error: f64,
}

/// Monte Carlo estimate of the schedule's cost: deterministic production
/// plus sampled regulation cost.
#[derive(Debug, Clone, Copy)]
pub struct CostEstimate {
    pub generation: f64,
    pub corrective_mean: f64,
    pub corrective_std_error: f64,
    pub scenarios: usize,
}

/// Everything the validator measures for one schedule.
pub struct SecurityReport {
    pub scenarios: usize,
    /// `None` for single-period horizons, which have no transitions.
    pub ramping: Option<RampingSecurity>,
    pub transmission: TransmissionSecurity,
    pub violations: Vec<ViolationEntry>,
    pub cost: CostEstimate,
}

fn check_shapes(
    problem: &DispatchProblem,
    schedule: &DispatchSchedule,
    scenarios: &ScenarioSet,
) -> Result<()> {
    if schedule.periods() != problem.periods() {
        return Err(Error::DimensionMismatch {
            what: "schedule periods",
            expected: problem.periods(),
            actual: schedule.periods(),
        });
    }
    if scenarios.periods() != problem.periods() || scenarios.n_wind != problem.n_wind() {
        return Err(Error::DimensionMismatch {
            what: "scenario shape",
            expected: problem.periods() * problem.n_wind(),
            actual: scenarios.periods() * scenarios.n_wind,
        });
    }
    Ok(())
}

/// Ramping security index over the horizon's transitions.
pub fn ramping_security_index(
    problem: &DispatchProblem,
    schedule: &DispatchSchedule,
    scenarios: &ScenarioSet,
) -> Result<RampingSecurity> {
    check_shapes(problem, schedule, scenarios)?;
    let t_count = problem.periods();
    if t_count < 2 {
        return Err(Error::NotApplicable(
            "ramping security needs at least two periods".into(),
        ));
    }
    let dt = problem.horizon.period_minutes;
    let n = scenarios.count();
    let mut ok_counts = vec![0usize; t_count - 1];
    for s in 0..n {
        for t in 1..t_count {
            let miss_t = schedule.total_wind[t] - scenarios.total(s, t);
            let miss_p = schedule.total_wind[t - 1] - scenarios.total(s, t - 1);
            let mut all_ok = true;
            for (j, u) in problem.agc.iter().enumerate() {
                let ramp = (schedule.agc[t][j] + u.alpha * miss_t)
                    - (schedule.agc[t - 1][j] + u.alpha * miss_p);
                if ramp > u.ramp_up * dt || ramp < -u.ramp_down * dt {
                    all_ok = false;
                    break;
                }
            }
            if all_ok {
                ok_counts[t - 1] += 1;
            }
        }
    }
    let per_transition: Vec<f64> = ok_counts.iter().map(|&c| c as f64 / n as f64).collect();
    let average = per_transition.iter().sum::<f64>() / per_transition.len() as f64;
    Ok(RampingSecurity {
        per_transition,
        average,
    })
}

/// Per-scenario line flows: scheduled conventional injections plus
/// realized wind and the AGC response, minus loads.
struct FlowEvaluator<'a> {
    problem: &'a DispatchProblem,
    /// Scheduled flow contribution of conventional units and loads.
    base: Vec<Vec<f64>>, // [line][period]
    /// AGC response sensitivity per line.
    g_agc: Vec<f64>,
    /// Farm sensitivities per line.
    g_farm: Vec<Vec<f64>>, // [line][farm]
}

impl<'a> FlowEvaluator<'a> {
    fn new(
        problem: &'a DispatchProblem,
        schedule: &DispatchSchedule,
        ptdf: &'a PtdfMatrix,
    ) -> Self {
        let l_count = problem.grid.lines().len();
        let t_count = problem.periods();
        let mut base = vec![vec![0.0; t_count]; l_count];
        let mut g_agc = vec![0.0; l_count];
        let mut g_farm = vec![vec![0.0; problem.n_wind()]; l_count];
        for l in 0..l_count {
            for (j, u) in problem.agc.iter().enumerate() {
                g_agc[l] += ptdf.factor(l, u.bus) * u.alpha;
                for t in 0..t_count {
                    base[l][t] += ptdf.factor(l, u.bus) * schedule.agc[t][j];
                }
            }
            for (i, u) in problem.non_agc.iter().enumerate() {
                for t in 0..t_count {
                    base[l][t] += ptdf.factor(l, u.bus) * schedule.non_agc[t][i];
                }
            }
            for (k, farm) in problem.wind_farms.iter().enumerate() {
                g_farm[l][k] = ptdf.factor(l, farm.bus);
            }
            for t in 0..t_count {
                for b in 0..problem.grid.bus_count() {
                    base[l][t] -= ptdf.factor(l, b) * problem.loads[t][b];
                }
            }
        }
        Self {
            problem,
            base,
            g_agc,
            g_farm,
        }
    }

    fn flow(
        &self,
        schedule: &DispatchSchedule,
        scenarios: &ScenarioSet,
        s: usize,
        l: usize,
        t: usize,
    ) -> f64 {
        let total = scenarios.total(s, t);
        let mut f = self.base[l][t] + self.g_agc[l] * (schedule.total_wind[t] - total);
        for k in 0..self.problem.n_wind() {
            f += self.g_farm[l][k] * scenarios.farm(s, t, k);
        }
        f
    }

    fn line_limit(&self, l: usize, t: usize) -> f64 {
        self.problem.grid.lines()[l].limit.at(t)
    }
}

/// Transmission security index: the fraction of scenarios with every
/// monitored line inside its limit, per period and over the whole horizon.
pub fn transmission_security_index(
    problem: &DispatchProblem,
    schedule: &DispatchSchedule,
    scenarios: &ScenarioSet,
) -> Result<TransmissionSecurity> {
    check_shapes(problem, schedule, scenarios)?;
    let ptdf = build_ptdf(&problem.grid)?;
    let eval = FlowEvaluator::new(problem, schedule, &ptdf);
    let n = scenarios.count();
    let t_count = problem.periods();
    let l_count = problem.grid.lines().len();
    let mut ok_period = vec![0usize; t_count];
    let mut ok_all = 0usize;
    for s in 0..n {
        let mut horizon_ok = true;
        for t in 0..t_count {
            let mut period_ok = true;
            for l in 0..l_count {
                let limit = eval.line_limit(l, t);
                if !limit.is_finite() {
                    continue;
                }
                let f = eval.flow(schedule, scenarios, s, l, t);
                if f.abs() > limit {
                    period_ok = false;
                    break;
                }
            }
            if period_ok {
                ok_period[t] += 1;
            } else {
                horizon_ok = false;
            }
        }
        if horizon_ok {
            ok_all += 1;
        }
    }
    Ok(TransmissionSecurity {
        per_period: ok_period.iter().map(|&c| c as f64 / n as f64).collect(),
        overall: ok_all as f64 / n as f64,
    })
}

fn rate_entry(family: ConstraintFamily, name: String, violations: usize, n: usize) -> ViolationEntry {
    let rate = violations as f64 / n as f64;
    ViolationEntry {
        family,
        name,
        rate,
        std_error: (rate * (1.0 - rate) / n as f64).sqrt(),
    }
}

/// Failure frequency of every original probabilistic statement: AGC
/// capacity per unit, period, and side; AGC ramps per unit and transition;
/// reserve margins per period and side; line flows per line, period, and
/// side. Entry names match the model's constraint rows.
pub fn chance_violation_rates(
    problem: &DispatchProblem,
    schedule: &DispatchSchedule,
    scenarios: &ScenarioSet,
) -> Result<Vec<ViolationEntry>> {
    check_shapes(problem, schedule, scenarios)?;
    let n = scenarios.count();
    let t_count = problem.periods();
    let dt = problem.horizon.period_minutes;
    let mut entries = Vec::new();

    // Capacity and ramp statements need realized outputs; accumulate
    // counts in one sweep over scenarios.
    let j_count = problem.agc.len();
    let mut cap_hi = vec![vec![0usize; t_count]; j_count];
    let mut cap_lo = vec![vec![0usize; t_count]; j_count];
    let mut ramp_up = vec![vec![0usize; t_count]; j_count];
    let mut ramp_down = vec![vec![0usize; t_count]; j_count];
    let mut res_up = vec![0usize; t_count];
    let mut res_down = vec![0usize; t_count];
    let cap_sum: f64 = problem.agc.iter().map(|u| u.p_max).sum();
    let floor_sum: f64 = problem.agc.iter().map(|u| u.p_min).sum();
    for s in 0..n {
        let mut prev_realized: Vec<f64> = Vec::new();
        for t in 0..t_count {
            let miss = schedule.total_wind[t] - scenarios.total(s, t);
            let mut fleet_sum = 0.0;
            let realized: Vec<f64> = problem
                .agc
                .iter()
                .enumerate()
                .map(|(j, u)| schedule.agc[t][j] + u.alpha * miss)
                .collect();
            for (j, u) in problem.agc.iter().enumerate() {
                let p = realized[j];
                fleet_sum += p;
                if p > u.p_max {
                    cap_hi[j][t] += 1;
                }
                if p < u.p_min {
                    cap_lo[j][t] += 1;
                }
                if t > 0 {
                    let ramp = p - prev_realized[j];
                    if ramp > u.ramp_up * dt {
                        ramp_up[j][t] += 1;
                    }
                    if ramp < -u.ramp_down * dt {
                        ramp_down[j][t] += 1;
                    }
                }
            }
            if cap_sum.is_finite() && cap_sum - fleet_sum < problem.reserve_up[t] {
                res_up[t] += 1;
            }
            if floor_sum.is_finite() && fleet_sum - floor_sum < problem.reserve_down[t] {
                res_down[t] += 1;
            }
            prev_realized = realized;
        }
    }
    for (j, u) in problem.agc.iter().enumerate() {
        for t in 0..t_count {
            if u.p_max.is_finite() {
                entries.push(rate_entry(
                    ConstraintFamily::AgcCapacity,
                    format!("agc-cap-hi[{}]@t{}", u.name, t + 1),
                    cap_hi[j][t],
                    n,
                ));
            }
            if u.p_min.is_finite() {
                entries.push(rate_entry(
                    ConstraintFamily::AgcCapacity,
                    format!("agc-cap-lo[{}]@t{}", u.name, t + 1),
                    cap_lo[j][t],
                    n,
                ));
            }
            if t > 0 {
                if u.ramp_up.is_finite() {
                    entries.push(rate_entry(
                        ConstraintFamily::AgcRamp,
                        format!("agc-ramp-up[{}]@t{}", u.name, t + 1),
                        ramp_up[j][t],
                        n,
                    ));
                }
                if u.ramp_down.is_finite() {
                    entries.push(rate_entry(
                        ConstraintFamily::AgcRamp,
                        format!("agc-ramp-down[{}]@t{}", u.name, t + 1),
                        ramp_down[j][t],
                        n,
                    ));
                }
            }
        }
    }
    for t in 0..t_count {
        if cap_sum.is_finite() {
            entries.push(rate_entry(
                ConstraintFamily::Reserve,
                format!("reserve-up@t{}", t + 1),
                res_up[t],
                n,
            ));
        }
        if floor_sum.is_finite() {
            entries.push(rate_entry(
                ConstraintFamily::Reserve,
                format!("reserve-down@t{}", t + 1),
                res_down[t],
                n,
            ));
        }
    }

    // Line flow statements.
    let ptdf = build_ptdf(&problem.grid)?;
    let eval = FlowEvaluator::new(problem, schedule, &ptdf);
    let l_count = problem.grid.lines().len();
    for l in 0..l_count {
        let tag = format!("{}-{}", problem.grid.lines()[l].from, problem.grid.lines()[l].to);
        for t in 0..t_count {
            let limit = eval.line_limit(l, t);
            if !limit.is_finite() {
                continue;
            }
            let mut over = 0usize;
            let mut under = 0usize;
            for s in 0..n {
                let f = eval.flow(schedule, scenarios, s, l, t);
                if f > limit {
                    over += 1;
                }
                if f < -limit {
                    under += 1;
                }
            }
            entries.push(rate_entry(
                ConstraintFamily::Transmission,
                format!("line-hi[{tag}]@t{}", t + 1),
                over,
                n,
            ));
            entries.push(rate_entry(
                ConstraintFamily::Transmission,
                format!("line-lo[{tag}]@t{}", t + 1),
                under,
                n,
            ));
        }
    }
    Ok(entries)
}

/// Monte Carlo estimate of the expected regulation cost, restricted like
/// the closed form to scenarios whose total wind lies inside the physical
/// range `[0, w_bar]` of each period.
pub fn mc_expected_cost(
    problem: &DispatchProblem,
    schedule: &DispatchSchedule,
    scenarios: &ScenarioSet,
) -> Result<CostEstimate> {
    check_shapes(problem, schedule, scenarios)?;
    let n = scenarios.count();
    let s_plus: f64 = problem.agc.iter().map(|u| u.alpha * u.gamma_up).sum();
    let s_minus: f64 = problem.agc.iter().map(|u| u.alpha * u.gamma_down).sum();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for s in 0..n {
        let mut cost = 0.0;
        for t in 0..problem.periods() {
            let total = scenarios.total(s, t);
            if !(0.0..=problem.forecasts[t].w_bar).contains(&total) {
                continue;
            }
            let miss = schedule.total_wind[t] - total;
            cost += s_plus * miss.max(0.0) + s_minus * (-miss).max(0.0);
        }
        sum += cost;
        sum_sq += cost * cost;
    }
    let mean = sum / n as f64;
    let var = (sum_sq / n as f64 - mean * mean).max(0.0);
    Ok(CostEstimate {
        generation: crate::model::generation_cost(&problem.non_agc, &problem.agc, schedule),
        corrective_mean: mean,
        corrective_std_error: (var / n as f64).sqrt(),
        scenarios: n,
    })
}

/// Runs the full assessment: security indexes, violation rates, and the
/// sampled cost.
pub fn assess(
    problem: &DispatchProblem,
    schedule: &DispatchSchedule,
    scenarios: &ScenarioSet,
) -> Result<SecurityReport> {
    check_shapes(problem, schedule, scenarios)?;
    let ramping = match ramping_security_index(problem, schedule, scenarios) {
        Ok(r) => Some(r),
        Err(Error::NotApplicable(_)) => None,
        Err(e) => return Err(e),
    };
    let transmission = transmission_security_index(problem, schedule, scenarios)?;
    let violations = chance_violation_rates(problem, schedule, scenarios)?;
    let cost = mc_expected_cost(problem, schedule, scenarios)?;
    Ok(SecurityReport {
        scenarios: scenarios.count(),
        ramping,
        transmission,
        violations,
        cost,
    })
}
