//! Shared helpers for unit tests: numerical oracles that deliberately avoid
//! the code paths under test, plus a small dispatch fixture.

use nalgebra::{DMatrix, DVector};

use crate::cauchy::MultivariateCauchy;
use crate::model::{
    AgcUnit, DispatchProblem, HorizonConfig, NonAgcUnit, RiskLevels, WindFarm, WindForecastPeriod,
};
use crate::network::{GridModel, Line, LineLimit};

/// Three-bus, two-period dispatch problem exercising every row family: one
/// conventional unit, two AGC units with finite ramps, two wind farms, and
/// three monitored lines.
pub fn small_problem() -> DispatchProblem {
    let grid = GridModel::new(
        3,
        vec![
            Line {
                from: 0,
                to: 1,
                reactance: 0.1,
                limit: LineLimit::Scalar(100.0),
            },
            Line {
                from: 1,
                to: 2,
                reactance: 0.1,
                limit: LineLimit::Scalar(80.0),
            },
            Line {
                from: 0,
                to: 2,
                reactance: 0.1,
                limit: LineLimit::Scalar(120.0),
            },
        ],
        0,
    )
    .unwrap();
    let forecast = |mu: [f64; 2], s: [f64; 4]| WindForecastPeriod {
        distribution: MultivariateCauchy::new(
            DVector::from_row_slice(&mu),
            DMatrix::from_row_slice(2, 2, &s),
        )
        .unwrap(),
        caps: vec![80.0, 60.0],
        w_bar: 140.0,
    };
    DispatchProblem {
        grid,
        horizon: HorizonConfig {
            periods: 2,
            period_minutes: 5.0,
            initial_non_agc: vec![100.0],
            initial_agc: vec![70.0, 50.0],
        },
        non_agc: vec![NonAgcUnit {
            name: "N1".into(),
            bus: 0,
            p_min: 0.0,
            p_max: 200.0,
            ramp_up: f64::INFINITY,
            ramp_down: f64::INFINITY,
            cost_a: 0.001,
            cost_b: 2.0,
            cost_c: 0.0,
        }],
        agc: vec![
            AgcUnit {
                name: "A1".into(),
                bus: 1,
                p_min: 0.0,
                p_max: 150.0,
                ramp_up: 2.0,
                ramp_down: 2.0,
                cost_a: 0.0012,
                cost_b: 2.4,
                cost_c: 0.0,
                alpha: 0.6,
                gamma_up: 10.0,
                gamma_down: 20.0,
            },
            AgcUnit {
                name: "A2".into(),
                bus: 2,
                p_min: 0.0,
                p_max: 120.0,
                ramp_up: 1.5,
                ramp_down: 1.5,
                cost_a: 0.0009,
                cost_b: 2.6,
                cost_c: 0.0,
                alpha: 0.4,
                gamma_up: 12.0,
                gamma_down: 18.0,
            },
        ],
        wind_farms: vec![
            WindFarm {
                name: "W1".into(),
                bus: 1,
                capacity: 80.0,
            },
            WindFarm {
                name: "W2".into(),
                bus: 2,
                capacity: 60.0,
            },
        ],
        loads: vec![vec![50.0, 100.0, 60.0], vec![55.0, 95.0, 70.0]],
        // Spreads sized so the probabilistic ramp bands stay non-empty:
        // alpha * sqrt(sigma_t^2 + sigma_{t-1}^2) * tan(0.45 pi) must be
        // below each unit's per-period ramp room.
        forecasts: vec![
            forecast([40.0, 25.0], [1.0, 0.25, 0.25, 0.6]),
            forecast([38.0, 28.0], [0.8, 0.2, 0.2, 0.7]),
        ],
        risk: RiskLevels::uniform(0.05).unwrap(),
        reserve_up: vec![20.0, 20.0],
        reserve_down: vec![15.0, 15.0],
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    // Pre-split into equal panels so a feature sitting exactly at a panel
    // midpoint cannot fool the refinement criterion into stopping early.
    const PANELS: usize = 16;
    let mut total = 0.0;
    for i in 0..PANELS {
        let pa = a + (b - a) * i as f64 / PANELS as f64;
        let pb = a + (b - a) * (i + 1) as f64 / PANELS as f64;
        let fa = f(pa);
        let fb = f(pb);
        let m = 0.5 * (pa + pb);
        let fm = f(m);
        let whole = simpson(pa, fa, pb, fb, fm);
        total += recurse(f, pa, fa, pb, fb, fm, whole, tol / PANELS as f64, 44);
    }
    total
}

/// Kolmogorov-Smirnov statistic of pre-sorted `samples` against `cdf`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = samples.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        sup = sup.max((f - lo).abs()).max((hi - f).abs());
    }
    sup
}
