//! JSON system description.
//!
//! The file carries hourly prices; the loader rescales them to the period
//! length so the model works in dollars per period throughout:
//! `cost.quadratic` ($/MW^2 h), `cost.linear` ($/MWh), `cost.fixed` ($/h),
//! and the AGC regulation prices `gamma_up` / `gamma_down` ($/MWh) are all
//! multiplied by `period_minutes / 60`. Ramp rates are MW per minute and
//! omitted fields mean unlimited. Line limits and reserve requirements
//! accept either one number for the whole horizon or one per period.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::cauchy::MultivariateCauchy;
use crate::error::{Error, Result};
use crate::model::{
    AgcUnit, DispatchProblem, HorizonConfig, NonAgcUnit, RiskLevels, WindFarm,
    WindForecastPeriod,
};
use crate::network::{GridModel, Line, LineLimit};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    grid: GridFile,
    horizon: HorizonFile,
    units: UnitsFile,
    wind_farms: Vec<WindFarmFile>,
    forecasts: Vec<ForecastFile>,
    loads: Vec<Vec<f64>>,
    risk: RiskFile,
    reserves: ReservesFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    buses: usize,
    slack_bus: usize,
    lines: Vec<LineFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineFile {
    from: usize,
    to: usize,
    reactance: f64,
    #[serde(default)]
    limit: Option<Profile>,
}

/// A scalar applied to every period, or an explicit per-period profile.
#[derive(Deserialize)]
#[serde(untagged)]
enum Profile {
    Scalar(f64),
    PerPeriod(Vec<f64>),
}

impl Profile {
    fn expand(&self, periods: usize, what: &str) -> Result<Vec<f64>> {
        match self {
            Profile::Scalar(v) => Ok(vec![*v; periods]),
            Profile::PerPeriod(v) => {
                if v.len() != periods {
                    return Err(Error::InvalidProblem(format!(
                        "{what}: profile has {} entries for {periods} periods",
                        v.len()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HorizonFile {
    periods: usize,
    period_minutes: f64,
    initial_non_agc: Vec<f64>,
    initial_agc: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitsFile {
    non_agc: Vec<NonAgcFile>,
    agc: Vec<AgcFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CostFile {
    quadratic: f64,
    linear: f64,
    #[serde(default)]
    fixed: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NonAgcFile {
    name: String,
    bus: usize,
    p_min: f64,
    p_max: f64,
    #[serde(default)]
    ramp_up: Option<f64>,
    #[serde(default)]
    ramp_down: Option<f64>,
    cost: CostFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AgcFile {
    name: String,
    bus: usize,
    p_min: f64,
    p_max: f64,
    #[serde(default)]
    ramp_up: Option<f64>,
    #[serde(default)]
    ramp_down: Option<f64>,
    cost: CostFile,
    alpha: AlphaFile,
    gamma_up: f64,
    gamma_down: f64,
}

/// Participation factor: either a literal share or the keyword
/// `"proportional"`, which splits the factors in proportion to capacity.
#[derive(Deserialize)]
#[serde(untagged)]
enum AlphaFile {
    Share(f64),
    Rule(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WindFarmFile {
    name: String,
    bus: usize,
    capacity: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ForecastFile {
    location: Vec<f64>,
    scale: Vec<Vec<f64>>,
    caps: Vec<f64>,
    w_bar: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RiskFile {
    delta: f64,
    beta: f64,
    epsilon: f64,
    eta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ReservesFile {
    up: Profile,
    down: Profile,
}

/// Parses a JSON system description into a validated dispatch problem.
pub fn parse_system(text: &str) -> Result<DispatchProblem> {
    let file: SystemFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("system file: {e}")))?;
    build_problem(file)
}

/// Loads and parses a JSON system file.
pub fn load_system(path: &Path) -> Result<DispatchProblem> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_system(&text)
}

/// Resolves participation factors, splitting proportionally to capacity
/// when every unit opts into the `"proportional"` rule.
fn expand_alphas(units: &[AgcFile]) -> Result<Vec<f64>> {
    let mut shares = Vec::with_capacity(units.len());
    let mut proportional = 0usize;
    for (j, u) in units.iter().enumerate() {
        match &u.alpha {
            AlphaFile::Share(a) => shares.push(*a),
            AlphaFile::Rule(word) if word == "proportional" => {
                proportional += 1;
                shares.push(f64::NAN);
            }
            AlphaFile::Rule(word) => {
                return Err(Error::InvalidProblem(format!(
                    "units.agc[{j}].alpha: unknown rule {word:?} (use a number or \"proportional\")"
                )));
            }
        }
    }
    if proportional == 0 {
        return Ok(shares);
    }
    if proportional != units.len() {
        return Err(Error::InvalidProblem(
            "units.agc: mixing literal alpha values with \"proportional\" is ambiguous; \
             use one style for every unit"
                .into(),
        ));
    }
    let total: f64 = units.iter().map(|u| u.p_max).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidProblem(
            "units.agc: proportional alpha needs positive total capacity".into(),
        ));
    }
    Ok(units.iter().map(|u| u.p_max / total).collect())
}

fn build_problem(file: SystemFile) -> Result<DispatchProblem> {
    let periods = file.horizon.periods;
    if periods == 0 {
        return Err(Error::InvalidProblem("horizon.periods must be positive".into()));
    }
    if !(file.horizon.period_minutes > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "horizon.period_minutes = {} must be positive",
            file.horizon.period_minutes
        )));
    }
    // Hourly prices become dollars per period.
    let hours = file.horizon.period_minutes / 60.0;

    let mut lines = Vec::with_capacity(file.grid.lines.len());
    for (l, lf) in file.grid.lines.iter().enumerate() {
        let limit = match &lf.limit {
            None => LineLimit::unlimited(),
            Some(Profile::Scalar(v)) => LineLimit::Scalar(*v),
            Some(p) => LineLimit::PerPeriod(p.expand(periods, &format!("grid.lines[{l}].limit"))?),
        };
        lines.push(Line {
            from: lf.from,
            to: lf.to,
            reactance: lf.reactance,
            limit,
        });
    }
    let grid = GridModel::new(file.grid.buses, lines, file.grid.slack_bus)?;

    let non_agc: Vec<NonAgcUnit> = file
        .units
        .non_agc
        .iter()
        .map(|u| NonAgcUnit {
            name: u.name.clone(),
            bus: u.bus,
            p_min: u.p_min,
            p_max: u.p_max,
            ramp_up: u.ramp_up.unwrap_or(f64::INFINITY),
            ramp_down: u.ramp_down.unwrap_or(f64::INFINITY),
            cost_a: u.cost.quadratic * hours,
            cost_b: u.cost.linear * hours,
            cost_c: u.cost.fixed * hours,
        })
        .collect();
    let alphas = expand_alphas(&file.units.agc)?;
    let agc: Vec<AgcUnit> = file
        .units
        .agc
        .iter()
        .zip(alphas)
        .map(|(u, alpha)| AgcUnit {
            name: u.name.clone(),
            bus: u.bus,
            p_min: u.p_min,
            p_max: u.p_max,
            ramp_up: u.ramp_up.unwrap_or(f64::INFINITY),
            ramp_down: u.ramp_down.unwrap_or(f64::INFINITY),
            cost_a: u.cost.quadratic * hours,
            cost_b: u.cost.linear * hours,
            cost_c: u.cost.fixed * hours,
            alpha,
            gamma_up: u.gamma_up * hours,
            gamma_down: u.gamma_down * hours,
        })
        .collect();

    let wind_farms: Vec<WindFarm> = file
        .wind_farms
        .iter()
        .map(|f| WindFarm {
            name: f.name.clone(),
            bus: f.bus,
            capacity: f.capacity,
        })
        .collect();

    if file.forecasts.len() != periods {
        return Err(Error::InvalidProblem(format!(
            "forecasts: {} entries for {periods} periods",
            file.forecasts.len()
        )));
    }
    let k = wind_farms.len();
    let mut forecasts = Vec::with_capacity(periods);
    for (t, f) in file.forecasts.iter().enumerate() {
        if f.location.len() != k {
            return Err(Error::InvalidProblem(format!(
                "forecasts[{t}].location: {} entries for {k} wind farms",
                f.location.len()
            )));
        }
        if f.scale.len() != k || f.scale.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidProblem(format!(
                "forecasts[{t}].scale: must be a {k} x {k} matrix"
            )));
        }
        let location = DVector::from_row_slice(&f.location);
        let scale = DMatrix::from_fn(k, k, |r, c| f.scale[r][c]);
        let distribution = MultivariateCauchy::new(location, scale)
            .map_err(|e| Error::InvalidProblem(format!("forecasts[{t}].scale: {e}")))?;
        forecasts.push(WindForecastPeriod {
            distribution,
            caps: f.caps.clone(),
            w_bar: f.w_bar,
        });
    }

    if file.loads.len() != periods {
        return Err(Error::InvalidProblem(format!(
            "loads: {} rows for {periods} periods",
            file.loads.len()
        )));
    }
    for (t, row) in file.loads.iter().enumerate() {
        if row.len() != file.grid.buses {
            return Err(Error::InvalidProblem(format!(
                "loads[{t}]: {} entries for {} buses",
                row.len(),
                file.grid.buses
            )));
        }
    }

    let risk = RiskLevels::new(file.risk.delta, file.risk.beta, file.risk.epsilon, file.risk.eta)
        .map_err(|e| Error::InvalidProblem(format!("risk: {e}")))?;
    let reserve_up = file.reserves.up.expand(periods, "reserves.up")?;
    let reserve_down = file.reserves.down.expand(periods, "reserves.down")?;

    let problem = DispatchProblem {
        grid,
        horizon: HorizonConfig {
            periods,
            period_minutes: file.horizon.period_minutes,
            initial_non_agc: file.horizon.initial_non_agc.clone(),
            initial_agc: file.horizon.initial_agc.clone(),
        },
        non_agc,
        agc,
        wind_farms,
        loads: file.loads,
        forecasts,
        risk,
        reserve_up,
        reserve_down,
    };
    problem.validate()?;
    Ok(problem)
}
