//! Problem data for the look-ahead dispatch: generating units, wind farms,
//! per-period forecast-error distributions, risk levels, and the variable
//! layout shared by the model builder, solver, and validator.

use nalgebra::DVector;

use crate::cauchy::{MultivariateCauchy, UnivariateCauchy};
use crate::error::{Error, Result};
use crate::network::GridModel;

/// Conventional unit without automatic generation control. Its output is
/// fixed at the scheduled value within each period.
#[derive(Debug, Clone)]
pub struct NonAgcUnit {
    pub name: String,
    pub bus: usize,
    /// MW output range.
    pub p_min: f64,
    pub p_max: f64,
    /// MW per minute; `f64::INFINITY` disables the ramp constraint.
    pub ramp_up: f64,
    pub ramp_down: f64,
    /// Per-period production cost `a p^2 + b p + c` in dollars.
    pub cost_a: f64,
    pub cost_b: f64,
    pub cost_c: f64,
}

/// Unit on automatic generation control. Its realized output deviates from
/// the schedule by `-alpha` times the total wind forecast error, and each MW
/// of deviation is priced at the regulation prices below.
#[derive(Debug, Clone)]
pub struct AgcUnit {
    pub name: String,
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    /// MW per minute; `f64::INFINITY` disables the ramp constraint.
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub cost_a: f64,
    pub cost_b: f64,
    pub cost_c: f64,
    /// Participation factor in [0, 1]; factors sum to one across the fleet.
    pub alpha: f64,
    /// Dollars per MW of upward deviation over one period.
    pub gamma_up: f64,
    /// Dollars per MW of downward deviation over one period.
    pub gamma_down: f64,
}

#[derive(Debug, Clone)]
pub struct WindFarm {
    pub name: String,
    pub bus: usize,
    /// Nameplate MW, an upper bound on any period's schedule cap.
    pub capacity: f64,
}

/// Forecast for one period: the joint error distribution across farms, the
/// per-farm schedule caps, and the bound on total realized wind used by the
/// corrective cost.
#[derive(Debug, Clone)]
pub struct WindForecastPeriod {
    /// Joint distribution of realized farm outputs (location = point
    /// forecast, heavy-tailed spread around it).
    pub distribution: MultivariateCauchy,
    /// Per-farm MW caps on the scheduled injection.
    pub caps: Vec<f64>,
    /// Upper bound on total realized wind output in MW.
    pub w_bar: f64,
}

/// Acceptable violation probabilities, each strictly inside (0, 1/2).
#[derive(Debug, Clone, Copy)]
pub struct RiskLevels {
    /// AGC capacity rows.
    pub delta: f64,
    /// AGC ramp rows.
    pub beta: f64,
    /// Reserve margin rows.
    pub epsilon: f64,
    /// Transmission rows.
    pub eta: f64,
}

impl RiskLevels {
    pub fn new(delta: f64, beta: f64, epsilon: f64, eta: f64) -> Result<Self> {
        for (name, v) in [
            ("delta", delta),
            ("beta", beta),
            ("epsilon", epsilon),
            ("eta", eta),
        ] {
            if !(v > 0.0 && v < 0.5) {
                return Err(Error::Domain(format!(
                    "risk level {name} = {v} must lie strictly inside (0, 0.5)"
                )));
            }
        }
        Ok(Self {
            delta,
            beta,
            epsilon,
            eta,
        })
    }

    pub fn uniform(risk: f64) -> Result<Self> {
        Self::new(risk, risk, risk, risk)
    }

    /// Multiplies every level by `scale`, re-validating the result.
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        Self::new(
            self.delta * scale,
            self.beta * scale,
            self.epsilon * scale,
            self.eta * scale,
        )
    }
}

/// Horizon shape plus the outputs each unit held just before period one,
/// which anchor the first ramp constraints.
#[derive(Debug, Clone)]
pub struct HorizonConfig {
    pub periods: usize,
    pub period_minutes: f64,
    pub initial_non_agc: Vec<f64>,
    pub initial_agc: Vec<f64>,
}

/// Complete input to one dispatch solve.
#[derive(Debug, Clone)]
pub struct DispatchProblem {
    pub grid: GridModel,
    pub horizon: HorizonConfig,
    pub non_agc: Vec<NonAgcUnit>,
    pub agc: Vec<AgcUnit>,
    pub wind_farms: Vec<WindFarm>,
    /// MW demand per period and bus, `periods x bus_count`.
    pub loads: Vec<Vec<f64>>,
    /// One forecast per period.
    pub forecasts: Vec<WindForecastPeriod>,
    pub risk: RiskLevels,
    /// Upward reserve requirement per period, MW.
    pub reserve_up: Vec<f64>,
    /// Downward reserve requirement per period, MW.
    pub reserve_down: Vec<f64>,
}

impl DispatchProblem {
    pub fn periods(&self) -> usize {
        self.horizon.periods
    }

    pub fn n_wind(&self) -> usize {
        self.wind_farms.len()
    }

    /// Distribution of total realized wind in period `t` (0-indexed): the
    /// unit-weight combination across farms.
    pub fn aggregate_wind(&self, t: usize) -> Result<UnivariateCauchy> {
        let k = self.n_wind();
        let ones = DVector::from_element(k, 1.0);
        self.forecasts[t].distribution.linear_combination(&ones)
    }

    /// Checks dimensions, ranges, and fleet invariants. Call once before
    /// building a program; builders assume a validated problem.
    pub fn validate(&self) -> Result<()> {
        let t = self.horizon.periods;
        let nb = self.grid.bus_count();
        let k = self.wind_farms.len();
        if t == 0 {
            return Err(Error::InvalidProblem("horizon has zero periods".into()));
        }
        if !(self.horizon.period_minutes > 0.0) {
            return Err(Error::InvalidProblem(format!(
                "period length {} minutes must be positive",
                self.horizon.period_minutes
            )));
        }
        if self.agc.is_empty() {
            return Err(Error::InvalidProblem(
                "at least one AGC unit is required to absorb forecast errors".into(),
            ));
        }
        if k == 0 {
            return Err(Error::InvalidProblem("no wind farms defined".into()));
        }
        if self.loads.len() != t {
            return Err(Error::DimensionMismatch {
                what: "load periods",
                expected: t,
                actual: self.loads.len(),
            });
        }
        for (ti, row) in self.loads.iter().enumerate() {
            if row.len() != nb {
                return Err(Error::DimensionMismatch {
                    what: "load buses",
                    expected: nb,
                    actual: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidProblem(format!(
                    "non-finite load {bad} in period {}",
                    ti + 1
                )));
            }
        }
        if self.forecasts.len() != t {
            return Err(Error::DimensionMismatch {
                what: "forecast periods",
                expected: t,
                actual: self.forecasts.len(),
            });
        }
        for (ti, f) in self.forecasts.iter().enumerate() {
            if f.distribution.dimension() != k {
                return Err(Error::DimensionMismatch {
                    what: "forecast farms",
                    expected: k,
                    actual: f.distribution.dimension(),
                });
            }
            if f.caps.len() != k {
                return Err(Error::DimensionMismatch {
                    what: "schedule caps",
                    expected: k,
                    actual: f.caps.len(),
                });
            }
            if !(f.w_bar > 0.0) || !f.w_bar.is_finite() {
                return Err(Error::InvalidProblem(format!(
                    "total wind bound {} in period {} must be positive and finite",
                    f.w_bar,
                    ti + 1
                )));
            }
            for (ki, (&cap, farm)) in f.caps.iter().zip(&self.wind_farms).enumerate() {
                if !(cap >= 0.0) || cap > farm.capacity + 1e-9 {
                    return Err(Error::InvalidProblem(format!(
                        "schedule cap {cap} for farm {ki} in period {} outside [0, {}]",
                        ti + 1,
                        farm.capacity
                    )));
                }
            }
        }
        for farm in &self.wind_farms {
            if farm.bus >= nb {
                return Err(Error::InvalidProblem(format!(
                    "wind farm '{}' placed on missing bus {}",
                    farm.name, farm.bus
                )));
            }
            if !(farm.capacity > 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "wind farm '{}' has non-positive capacity",
                    farm.name
                )));
            }
        }
        let check_unit = |name: &str,
                          bus: usize,
                          p_min: f64,
                          p_max: f64,
                          ru: f64,
                          rd: f64,
                          a: f64|
         -> Result<()> {
            if bus >= nb {
                return Err(Error::InvalidProblem(format!(
                    "unit '{name}' placed on missing bus {bus}"
                )));
            }
            if !(p_min <= p_max) {
                return Err(Error::InvalidProblem(format!(
                    "unit '{name}' has empty output range [{p_min}, {p_max}]"
                )));
            }
            if !(ru >= 0.0) || !(rd >= 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "unit '{name}' has negative ramp rate"
                )));
            }
            if !(a >= 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "unit '{name}' has concave production cost (a = {a})"
                )));
            }
            Ok(())
        };
        for u in &self.non_agc {
            check_unit(&u.name, u.bus, u.p_min, u.p_max, u.ramp_up, u.ramp_down, u.cost_a)?;
        }
        let mut alpha_sum = 0.0;
        for u in &self.agc {
            check_unit(&u.name, u.bus, u.p_min, u.p_max, u.ramp_up, u.ramp_down, u.cost_a)?;
            if !(0.0..=1.0).contains(&u.alpha) {
                return Err(Error::InvalidProblem(format!(
                    "unit '{}' has participation factor {} outside [0, 1]",
                    u.name, u.alpha
                )));
            }
            if !(u.gamma_up >= 0.0) || !(u.gamma_down >= 0.0) {
                return Err(Error::InvalidProblem(format!(
                    "unit '{}' has negative regulation price",
                    u.name
                )));
            }
            alpha_sum += u.alpha;
        }
        if (alpha_sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidProblem(format!(
                "participation factors sum to {alpha_sum}, expected 1"
            )));
        }
        if self.horizon.initial_non_agc.len() != self.non_agc.len() {
            return Err(Error::DimensionMismatch {
                what: "initial non-AGC outputs",
                expected: self.non_agc.len(),
                actual: self.horizon.initial_non_agc.len(),
            });
        }
        if self.horizon.initial_agc.len() != self.agc.len() {
            return Err(Error::DimensionMismatch {
                what: "initial AGC outputs",
                expected: self.agc.len(),
                actual: self.horizon.initial_agc.len(),
            });
        }
        for (name, r) in [("upward", &self.reserve_up), ("downward", &self.reserve_down)] {
            if r.len() != t {
                return Err(Error::DimensionMismatch {
                    what: "reserve periods",
                    expected: t,
                    actual: r.len(),
                });
            }
            if let Some(bad) = r.iter().find(|v| !(**v >= 0.0)) {
                return Err(Error::InvalidProblem(format!(
                    "{name} reserve requirement {bad} must be non-negative"
                )));
            }
        }
        Ok(())
    }
}

/// Index map from (device, period) to a flat decision vector. Ordering is
/// period-major: all non-AGC outputs, then AGC outputs, then per-farm wind
/// schedules, then the total-wind variable, repeated per period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VariableLayout {
    pub n_non_agc: usize,
    pub n_agc: usize,
    pub n_wind: usize,
    pub periods: usize,
}

impl VariableLayout {
    pub fn for_problem(p: &DispatchProblem) -> Self {
        Self {
            n_non_agc: p.non_agc.len(),
            n_agc: p.agc.len(),
            n_wind: p.wind_farms.len(),
            periods: p.horizon.periods,
        }
    }

    fn per_period(&self) -> usize {
        self.n_non_agc + self.n_agc + self.n_wind + 1
    }

    pub fn n_vars(&self) -> usize {
        self.per_period() * self.periods
    }

    /// Scheduled output of non-AGC unit `i` in period `t`.
    pub fn non_agc(&self, i: usize, t: usize) -> usize {
        debug_assert!(i < self.n_non_agc && t < self.periods);
        t * self.per_period() + i
    }

    /// Scheduled output of AGC unit `j` in period `t`.
    pub fn agc(&self, j: usize, t: usize) -> usize {
        debug_assert!(j < self.n_agc && t < self.periods);
        t * self.per_period() + self.n_non_agc + j
    }

    /// Scheduled injection of wind farm `k` in period `t`.
    pub fn wind(&self, k: usize, t: usize) -> usize {
        debug_assert!(k < self.n_wind && t < self.periods);
        t * self.per_period() + self.n_non_agc + self.n_agc + k
    }

    /// Total scheduled wind in period `t`.
    pub fn total_wind(&self, t: usize) -> usize {
        debug_assert!(t < self.periods);
        t * self.per_period() + self.n_non_agc + self.n_agc + self.n_wind
    }

    pub fn names(&self, p: &DispatchProblem) -> Vec<String> {
        let mut names = vec![String::new(); self.n_vars()];
        for t in 0..self.periods {
            for (i, u) in p.non_agc.iter().enumerate() {
                names[self.non_agc(i, t)] = format!("p[{}]@t{}", u.name, t + 1);
            }
            for (j, u) in p.agc.iter().enumerate() {
                names[self.agc(j, t)] = format!("p[{}]@t{}", u.name, t + 1);
            }
            for (k, f) in p.wind_farms.iter().enumerate() {
                names[self.wind(k, t)] = format!("pw[{}]@t{}", f.name, t + 1);
            }
            names[self.total_wind(t)] = format!("w@t{}", t + 1);
        }
        names
    }

    /// Splits a flat solution vector back into per-period schedules.
    pub fn schedule_from(&self, x: &DVector<f64>) -> DispatchSchedule {
        let get = |idx: usize| x[idx];
        DispatchSchedule {
            non_agc: (0..self.periods)
                .map(|t| (0..self.n_non_agc).map(|i| get(self.non_agc(i, t))).collect())
                .collect(),
            agc: (0..self.periods)
                .map(|t| (0..self.n_agc).map(|j| get(self.agc(j, t))).collect())
                .collect(),
            wind: (0..self.periods)
                .map(|t| (0..self.n_wind).map(|k| get(self.wind(k, t))).collect())
                .collect(),
            total_wind: (0..self.periods).map(|t| get(self.total_wind(t))).collect(),
        }
    }
}

/// Scheduled outputs for every device and period, the solver's deliverable.
#[derive(Debug, Clone, PartialEq)]
pub struct DispatchSchedule {
    /// `periods x n_non_agc` MW.
    pub non_agc: Vec<Vec<f64>>,
    /// `periods x n_agc` MW.
    pub agc: Vec<Vec<f64>>,
    /// `periods x n_wind` MW.
    pub wind: Vec<Vec<f64>>,
    /// Total scheduled wind per period, MW.
    pub total_wind: Vec<f64>,
}

impl DispatchSchedule {
    pub fn periods(&self) -> usize {
        self.total_wind.len()
    }

    /// Flattens back into the solver's decision vector ordering.
    pub fn to_vector(&self, layout: &VariableLayout) -> DVector<f64> {
        let mut x = DVector::zeros(layout.n_vars());
        for t in 0..layout.periods {
            for i in 0..layout.n_non_agc {
                x[layout.non_agc(i, t)] = self.non_agc[t][i];
            }
            for j in 0..layout.n_agc {
                x[layout.agc(j, t)] = self.agc[t][j];
            }
            for k in 0..layout.n_wind {
                x[layout.wind(k, t)] = self.wind[t][k];
            }
            x[layout.total_wind(t)] = self.total_wind[t];
        }
        x
    }
}
