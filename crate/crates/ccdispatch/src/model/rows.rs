//! Constraint rows of the dispatch program.
//!
//! Every probabilistic requirement is first written in a compact form,
//! `Pr[decision + weights . wind <= rhs] >= 1 - risk`, and then converted to
//! an exact deterministic linear row through the quantile of the induced
//! univariate Cauchy distribution. The four stochastic row families
//! (AGC capacity, AGC ramping, reserve margins, transmission) differ only in
//! how they assemble the compact form; the conversion lives in one place.

use nalgebra::DVector;

use crate::cauchy::MultivariateCauchy;
use crate::error::{Error, Result};
use crate::model::program::{LinearRow, RowSense};
use crate::model::types::{DispatchProblem, VariableLayout};
use crate::network::PtdfMatrix;

/// Direction of the inequality inside the probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbabilisticSense {
    Le,
    Ge,
}

/// `Pr[sum(decision) + random_weights . wind (<=, >=) rhs] >= 1 - risk`
/// where `wind` follows the multivariate Cauchy distribution supplied at
/// conversion time.
#[derive(Debug, Clone)]
pub struct CompactChanceConstraint {
    pub name: String,
    pub decision: Vec<(usize, f64)>,
    pub random_weights: DVector<f64>,
    pub rhs: f64,
    pub risk: f64,
    pub sense: ProbabilisticSense,
}

/// Exact conversion of a chance constraint to a deterministic linear row.
///
/// The weighted wind term is itself Cauchy, so the probability statement
/// pins the decision part to one side of a quantile:
/// for the `<=` sense, `decision <= rhs - Q(1 - risk)`;
/// for the `>=` sense, `decision >= rhs - Q(risk)`.
pub fn convert_chance_row(
    c: &CompactChanceConstraint,
    wind: &MultivariateCauchy,
) -> Result<LinearRow> {
    if !(c.risk > 0.0 && c.risk < 0.5) {
        return Err(Error::Domain(format!(
            "row '{}': risk {} must lie strictly inside (0, 0.5)",
            c.name, c.risk
        )));
    }
    let combo = wind.linear_combination(&c.random_weights)?;
    let (sense, shifted_rhs) = match c.sense {
        ProbabilisticSense::Le => (RowSense::Le, c.rhs - combo.quantile(1.0 - c.risk)?),
        ProbabilisticSense::Ge => (RowSense::Ge, c.rhs - combo.quantile(c.risk)?),
    };
    Ok(LinearRow::new(
        c.name.clone(),
        c.decision.clone(),
        sense,
        shifted_rhs,
    ))
}

/// Power balance per period: scheduled generation plus scheduled wind
/// matches total demand.
pub fn balance_rows(p: &DispatchProblem, layout: &VariableLayout) -> Vec<LinearRow> {
    (0..layout.periods)
        .map(|t| {
            let mut coeffs = Vec::with_capacity(layout.n_non_agc + layout.n_agc + layout.n_wind);
            for i in 0..layout.n_non_agc {
                coeffs.push((layout.non_agc(i, t), 1.0));
            }
            for j in 0..layout.n_agc {
                coeffs.push((layout.agc(j, t), 1.0));
            }
            for k in 0..layout.n_wind {
                coeffs.push((layout.wind(k, t), 1.0));
            }
            let demand: f64 = p.loads[t].iter().sum();
            LinearRow::new(format!("balance@t{}", t + 1), coeffs, RowSense::Eq, demand)
        })
        .collect()
}

/// Definition of the total-wind variable: `w_t = sum_k pw_{k,t}`.
pub fn wind_linking_rows(_p: &DispatchProblem, layout: &VariableLayout) -> Vec<LinearRow> {
    (0..layout.periods)
        .map(|t| {
            let mut coeffs = vec![(layout.total_wind(t), 1.0)];
            for k in 0..layout.n_wind {
                coeffs.push((layout.wind(k, t), -1.0));
            }
            LinearRow::new(format!("wind-total@t{}", t + 1), coeffs, RowSense::Eq, 0.0)
        })
        .collect()
}

/// Deterministic ramp limits for units without AGC duty. The first period
/// is anchored at the output each unit held entering the horizon.
pub fn non_agc_ramp_rows(p: &DispatchProblem, layout: &VariableLayout) -> Vec<LinearRow> {
    let dt = p.horizon.period_minutes;
    let mut rows = Vec::new();
    for (i, u) in p.non_agc.iter().enumerate() {
        let p0 = p.horizon.initial_non_agc[i];
        for t in 0..layout.periods {
            let label = |d: &str| format!("ramp-{d}[{}]@t{}", u.name, t + 1);
            if t == 0 {
                if u.ramp_up.is_finite() {
                    rows.push(LinearRow::new(
                        label("up"),
                        vec![(layout.non_agc(i, 0), 1.0)],
                        RowSense::Le,
                        p0 + u.ramp_up * dt,
                    ));
                }
                if u.ramp_down.is_finite() {
                    rows.push(LinearRow::new(
                        label("down"),
                        vec![(layout.non_agc(i, 0), 1.0)],
                        RowSense::Ge,
                        p0 - u.ramp_down * dt,
                    ));
                }
            } else {
                let pair = vec![(layout.non_agc(i, t), 1.0), (layout.non_agc(i, t - 1), -1.0)];
                if u.ramp_up.is_finite() {
                    rows.push(LinearRow::new(
                        label("up"),
                        pair.clone(),
                        RowSense::Le,
                        u.ramp_up * dt,
                    ));
                }
                if u.ramp_down.is_finite() {
                    rows.push(LinearRow::new(label("down"), pair, RowSense::Ge, -u.ramp_down * dt));
                }
            }
        }
    }
    rows
}

/// Capacity protection for AGC units. The realized output
/// `p + alpha (w - wind_total)` must stay inside the unit's range with
/// probability `1 - delta` per side. Units with a zero participation factor
/// produce plain deterministic capacity rows.
pub fn agc_capacity_rows(p: &DispatchProblem, layout: &VariableLayout) -> Result<Vec<LinearRow>> {
    let k = layout.n_wind;
    let mut rows = Vec::new();
    for (j, u) in p.agc.iter().enumerate() {
        for t in 0..layout.periods {
            let hi_name = format!("agc-cap-hi[{}]@t{}", u.name, t + 1);
            let lo_name = format!("agc-cap-lo[{}]@t{}", u.name, t + 1);
            if u.alpha == 0.0 {
                if u.p_max.is_finite() {
                    rows.push(LinearRow::new(
                        hi_name,
                        vec![(layout.agc(j, t), 1.0)],
                        RowSense::Le,
                        u.p_max,
                    ));
                }
                if u.p_min.is_finite() {
                    rows.push(LinearRow::new(
                        lo_name,
                        vec![(layout.agc(j, t), 1.0)],
                        RowSense::Ge,
                        u.p_min,
                    ));
                }
                continue;
            }
            let decision = vec![(layout.agc(j, t), 1.0), (layout.total_wind(t), u.alpha)];
            let weights = DVector::from_element(k, -u.alpha);
            let wind = &p.forecasts[t].distribution;
            if u.p_max.is_finite() {
                rows.push(convert_chance_row(
                    &CompactChanceConstraint {
                        name: hi_name,
                        decision: decision.clone(),
                        random_weights: weights.clone(),
                        rhs: u.p_max,
                        risk: p.risk.delta,
                        sense: ProbabilisticSense::Le,
                    },
                    wind,
                )?);
            }
            if u.p_min.is_finite() {
                rows.push(convert_chance_row(
                    &CompactChanceConstraint {
                        name: lo_name,
                        decision,
                        random_weights: weights,
                        rhs: u.p_min,
                        risk: p.risk.delta,
                        sense: ProbabilisticSense::Ge,
                    },
                    wind,
                )?);
            }
        }
    }
    Ok(rows)
}

/// Ramp protection for AGC units across consecutive periods.
///
/// The realized ramp is the scheduled ramp plus
/// `alpha (wind_{t-1} - wind_t)`, whose two coordinates live in different
/// periods; the conversion therefore runs over the joint two-period
/// distribution, where the spreads combine in quadrature. The first period
/// is anchored deterministically at the entering output. With
/// `stochastic = false`, the quantile margins are dropped and only the
/// scheduled ramp (including its wind-tracking part) is limited.
pub fn agc_ramp_rows(
    p: &DispatchProblem,
    layout: &VariableLayout,
    stochastic: bool,
) -> Result<Vec<LinearRow>> {
    let k = layout.n_wind;
    let dt = p.horizon.period_minutes;
    let mut rows = Vec::new();
    for (j, u) in p.agc.iter().enumerate() {
        let p0 = p.horizon.initial_agc[j];
        for t in 0..layout.periods {
            let up_name = format!("agc-ramp-up[{}]@t{}", u.name, t + 1);
            let down_name = format!("agc-ramp-down[{}]@t{}", u.name, t + 1);
            if t == 0 {
                if u.ramp_up.is_finite() {
                    rows.push(LinearRow::new(
                        up_name,
                        vec![(layout.agc(j, 0), 1.0)],
                        RowSense::Le,
                        p0 + u.ramp_up * dt,
                    ));
                }
                if u.ramp_down.is_finite() {
                    rows.push(LinearRow::new(
                        down_name,
                        vec![(layout.agc(j, 0), 1.0)],
                        RowSense::Ge,
                        p0 - u.ramp_down * dt,
                    ));
                }
                continue;
            }
            let decision = vec![
                (layout.agc(j, t), 1.0),
                (layout.agc(j, t - 1), -1.0),
                (layout.total_wind(t), u.alpha),
                (layout.total_wind(t - 1), -u.alpha),
            ];
            if u.alpha == 0.0 || !stochastic {
                if u.ramp_up.is_finite() {
                    rows.push(LinearRow::new(
                        up_name.clone(),
                        decision.clone(),
                        RowSense::Le,
                        u.ramp_up * dt,
                    ));
                }
                if u.ramp_down.is_finite() {
                    rows.push(LinearRow::new(
                        down_name.clone(),
                        decision.clone(),
                        RowSense::Ge,
                        -u.ramp_down * dt,
                    ));
                }
                continue;
            }
            // Joint distribution of (wind_t, wind_{t-1}).
            let joint = MultivariateCauchy::block_diagonal(&[
                &p.forecasts[t].distribution,
                &p.forecasts[t - 1].distribution,
            ])?;
            let mut weights = DVector::zeros(2 * k);
            for c in 0..k {
                weights[c] = -u.alpha;
                weights[k + c] = u.alpha;
            }
            if u.ramp_up.is_finite() {
                rows.push(convert_chance_row(
                    &CompactChanceConstraint {
                        name: up_name,
                        decision: decision.clone(),
                        random_weights: weights.clone(),
                        rhs: u.ramp_up * dt,
                        risk: p.risk.beta,
                        sense: ProbabilisticSense::Le,
                    },
                    &joint,
                )?);
            }
            if u.ramp_down.is_finite() {
                rows.push(convert_chance_row(
                    &CompactChanceConstraint {
                        name: down_name,
                        decision,
                        random_weights: weights,
                        rhs: -u.ramp_down * dt,
                        risk: p.risk.beta,
                        sense: ProbabilisticSense::Ge,
                    },
                    &joint,
                )?);
            }
        }
    }
    Ok(rows)
}

/// Reserve margins per period: after the AGC response, the fleet must keep
/// the required headroom to its upper limits and footroom to its lower
/// limits with probability `1 - epsilon` each.
pub fn reserve_rows(p: &DispatchProblem, layout: &VariableLayout) -> Result<Vec<LinearRow>> {
    let k = layout.n_wind;
    let alpha_sum: f64 = p.agc.iter().map(|u| u.alpha).sum();
    let cap_sum: f64 = p.agc.iter().map(|u| u.p_max).sum();
    let floor_sum: f64 = p.agc.iter().map(|u| u.p_min).sum();
    let mut rows = Vec::new();
    for t in 0..layout.periods {
        let mut decision = vec![(layout.total_wind(t), alpha_sum)];
        for j in 0..layout.n_agc {
            decision.push((layout.agc(j, t), 1.0));
        }
        let weights = DVector::from_element(k, -alpha_sum);
        let wind = &p.forecasts[t].distribution;
        if cap_sum.is_finite() {
            rows.push(convert_chance_row(
                &CompactChanceConstraint {
                    name: format!("reserve-up@t{}", t + 1),
                    decision: decision.clone(),
                    random_weights: weights.clone(),
                    rhs: cap_sum - p.reserve_up[t],
                    risk: p.risk.epsilon,
                    sense: ProbabilisticSense::Le,
                },
                wind,
            )?);
        }
        if floor_sum.is_finite() {
            rows.push(convert_chance_row(
                &CompactChanceConstraint {
                    name: format!("reserve-down@t{}", t + 1),
                    decision,
                    random_weights: weights,
                    rhs: floor_sum + p.reserve_down[t],
                    risk: p.risk.epsilon,
                    sense: ProbabilisticSense::Ge,
                },
                wind,
            )?);
        }
    }
    Ok(rows)
}

/// Smallest weight magnitude treated as genuine wind exposure of a line;
/// below it the sensitivities cancel and the row is deterministic.
const WIND_EXPOSURE_FLOOR: f64 = 1e-12;

/// Line flow protection per line and period, built from injection shift
/// factors. Realized flows see the realized wind at each farm bus and the
/// AGC response spread over generator buses; with
/// `affine_recourse = false`, the AGC response is ignored when computing
/// each line's wind exposure.
pub fn transmission_rows(
    p: &DispatchProblem,
    layout: &VariableLayout,
    ptdf: &PtdfMatrix,
    affine_recourse: bool,
) -> Result<Vec<LinearRow>> {
    let k = layout.n_wind;
    let mut rows = Vec::new();
    for (l, line) in p.grid.lines().iter().enumerate() {
        let line_tag = format!("{}-{}", line.from, line.to);
        // AGC response sensitivity of this line.
        let g_agc: f64 = p
            .agc
            .iter()
            .map(|u| ptdf.factor(l, u.bus) * u.alpha)
            .sum();
        let recourse = if affine_recourse { g_agc } else { 0.0 };
        for t in 0..layout.periods {
            let limit = line.limit.at(t);
            if !limit.is_finite() {
                continue;
            }
            let mut decision = Vec::new();
            for (i, u) in p.non_agc.iter().enumerate() {
                decision.push((layout.non_agc(i, t), ptdf.factor(l, u.bus)));
            }
            for (j, u) in p.agc.iter().enumerate() {
                decision.push((layout.agc(j, t), ptdf.factor(l, u.bus)));
            }
            if recourse != 0.0 {
                decision.push((layout.total_wind(t), recourse));
            }
            // Wind exposure after netting out the AGC response.
            let mut weights = DVector::zeros(k);
            for (ki, farm) in p.wind_farms.iter().enumerate() {
                weights[ki] = ptdf.factor(l, farm.bus) - recourse;
            }
            let load_flow: f64 = (0..p.grid.bus_count())
                .map(|b| ptdf.factor(l, b) * p.loads[t][b])
                .sum();
            let hi_name = format!("line-hi[{line_tag}]@t{}", t + 1);
            let lo_name = format!("line-lo[{line_tag}]@t{}", t + 1);
            if weights.amax() <= WIND_EXPOSURE_FLOOR {
                rows.push(LinearRow::new(
                    hi_name,
                    decision.clone(),
                    RowSense::Le,
                    limit + load_flow,
                ));
                rows.push(LinearRow::new(lo_name, decision, RowSense::Ge, -limit + load_flow));
                continue;
            }
            let wind = &p.forecasts[t].distribution;
            rows.push(convert_chance_row(
                &CompactChanceConstraint {
                    name: hi_name,
                    decision: decision.clone(),
                    random_weights: weights.clone(),
                    rhs: limit + load_flow,
                    risk: p.risk.eta,
                    sense: ProbabilisticSense::Le,
                },
                wind,
            )?);
            rows.push(convert_chance_row(
                &CompactChanceConstraint {
                    name: lo_name,
                    decision,
                    random_weights: weights,
                    rhs: -limit + load_flow,
                    risk: p.risk.eta,
                    sense: ProbabilisticSense::Ge,
                },
                wind,
            )?);
        }
    }
    Ok(rows)
}
