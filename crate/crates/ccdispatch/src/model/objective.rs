//! Scheduling objective: quadratic production cost for every unit plus, per
//! period, the expected cost of AGC regulation energy. The regulation term
//! has a closed form when total wind follows a Cauchy distribution, so the
//! objective stays smooth, convex, and cheap to evaluate.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::cauchy::UnivariateCauchy;
use crate::error::{Error, Result};
use crate::model::program::Objective;
use crate::model::types::{AgcUnit, DispatchProblem, DispatchSchedule, NonAgcUnit, VariableLayout};

/// Expected regulation cost for one period as a function of the scheduled
/// total wind `w`.
///
/// When realized wind `x` lands below `w`, AGC units ramp up and each MW of
/// shortfall costs `s_plus` (the participation-weighted upward price); when
/// it lands above, each MW of surplus costs `s_minus`. Averaging over the
/// Cauchy density restricted to the physical range `[0, w_bar]` gives
///
/// ```text
/// cost(w) = A + B w + C (w - mu) atan(u) - (C sigma / 2) ln(1 + u^2),
/// u = (w - mu) / sigma,
/// ```
///
/// with constants `A`, `B`, `C` depending only on the prices and the
/// distribution. The curvature is `C sigma / ((w - mu)^2 + sigma^2)`, which
/// equals `(s_plus + s_minus)` times the wind density, so the term is
/// strictly convex wherever the density is positive.
#[derive(Debug, Clone, Copy)]
pub struct CorrectiveCostTerm {
    s_plus: f64,
    s_minus: f64,
    mu: f64,
    sigma: f64,
    w_bar: f64,
    a_const: f64,
    b_const: f64,
    c_const: f64,
}

impl CorrectiveCostTerm {
    /// Builds the term from aggregate prices, the distribution of total
    /// realized wind, and the physical bound on total output.
    pub fn new(
        s_plus: f64,
        s_minus: f64,
        aggregate: &UnivariateCauchy,
        w_bar: f64,
    ) -> Result<Self> {
        if !(s_plus >= 0.0) || !(s_minus >= 0.0) {
            return Err(Error::Domain(format!(
                "regulation prices ({s_plus}, {s_minus}) must be non-negative"
            )));
        }
        if s_plus + s_minus <= 0.0 {
            return Err(Error::Degenerate(
                "regulation is free: both aggregate prices are zero".into(),
            ));
        }
        if !(w_bar > 0.0) || !w_bar.is_finite() {
            return Err(Error::Domain(format!(
                "total wind bound {w_bar} must be positive and finite"
            )));
        }
        let mu = aggregate.location();
        let sigma = aggregate.scale();
        let u0 = -mu / sigma;
        let u1 = (w_bar - mu) / sigma;
        let t0 = u0.atan();
        let t1 = u1.atan();
        let c_const = (s_plus + s_minus) / PI;
        let b_const = -(s_plus * t0 + s_minus * t1) / PI;
        let a_const = sigma / (2.0 * PI) * (s_plus * (u0 * u0).ln_1p() + s_minus * (u1 * u1).ln_1p())
            + mu / PI * (s_plus * t0 + s_minus * t1);
        Ok(Self {
            s_plus,
            s_minus,
            mu,
            sigma,
            w_bar,
            a_const,
            b_const,
            c_const,
        })
    }

    /// Convenience constructor summing `alpha * gamma` over an AGC fleet.
    pub fn for_fleet(agc: &[AgcUnit], aggregate: &UnivariateCauchy, w_bar: f64) -> Result<Self> {
        let s_plus = agc.iter().map(|u| u.alpha * u.gamma_up).sum();
        let s_minus = agc.iter().map(|u| u.alpha * u.gamma_down).sum();
        Self::new(s_plus, s_minus, aggregate, w_bar)
    }

    pub fn w_bar(&self) -> f64 {
        self.w_bar
    }

    /// The slope coefficient on `atan`, `(s_plus + s_minus) / pi`; strictly
    /// positive by construction.
    pub fn curvature_coefficient(&self) -> f64 {
        self.c_const
    }

    fn value_unchecked(&self, w: f64) -> f64 {
        let u = (w - self.mu) / self.sigma;
        self.a_const + self.b_const * w + self.c_const * (w - self.mu) * u.atan()
            - 0.5 * self.c_const * self.sigma * (u * u).ln_1p()
    }

    /// Expected regulation cost at scheduled wind `w`; defined on the
    /// physical range `[0, w_bar]`.
    pub fn value(&self, w: f64) -> Result<f64> {
        if !(0.0..=self.w_bar).contains(&w) {
            return Err(Error::Domain(format!(
                "scheduled wind {w} outside [0, {}]",
                self.w_bar
            )));
        }
        Ok(self.value_unchecked(w))
    }

    /// First derivative `B + C atan((w - mu) / sigma)`.
    pub fn gradient(&self, w: f64) -> f64 {
        self.b_const + self.c_const * ((w - self.mu) / self.sigma).atan()
    }

    /// Second derivative `C sigma / ((w - mu)^2 + sigma^2)`.
    pub fn second_derivative(&self, w: f64) -> f64 {
        let d = w - self.mu;
        self.c_const * self.sigma / (d * d + self.sigma * self.sigma)
    }

    /// Aggregate up-regulation price backing this term.
    pub fn s_plus(&self) -> f64 {
        self.s_plus
    }

    /// Aggregate down-regulation price backing this term.
    pub fn s_minus(&self) -> f64 {
        self.s_minus
    }
}

/// Cost of a schedule split into its production and regulation parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    /// Quadratic production cost summed over units and periods, dollars.
    pub generation: f64,
    /// Expected AGC regulation cost summed over periods, dollars.
    pub corrective: f64,
}

impl CostBreakdown {
    pub fn total(&self) -> f64 {
        self.generation + self.corrective
    }
}

/// Quadratic production cost of a schedule, summed over units and periods.
pub fn generation_cost(
    non_agc: &[NonAgcUnit],
    agc: &[AgcUnit],
    schedule: &DispatchSchedule,
) -> f64 {
    let mut cost = 0.0;
    for t in 0..schedule.periods() {
        for (i, u) in non_agc.iter().enumerate() {
            let p = schedule.non_agc[t][i];
            cost += u.cost_a * p * p + u.cost_b * p + u.cost_c;
        }
        for (j, u) in agc.iter().enumerate() {
            let p = schedule.agc[t][j];
            cost += u.cost_a * p * p + u.cost_b * p + u.cost_c;
        }
    }
    cost
}

/// Evaluates the full scheduling objective for a given schedule.
pub fn scheduled_cost(problem: &DispatchProblem, schedule: &DispatchSchedule) -> Result<CostBreakdown> {
    let generation = generation_cost(&problem.non_agc, &problem.agc, schedule);
    let mut corrective = 0.0;
    let s_plus: f64 = problem.agc.iter().map(|u| u.alpha * u.gamma_up).sum();
    let s_minus: f64 = problem.agc.iter().map(|u| u.alpha * u.gamma_down).sum();
    if s_plus + s_minus > 0.0 {
        for t in 0..problem.periods() {
            let aggregate = problem.aggregate_wind(t)?;
            let term =
                CorrectiveCostTerm::new(s_plus, s_minus, &aggregate, problem.forecasts[t].w_bar)?;
            corrective += term.value(schedule.total_wind[t])?;
        }
    }
    Ok(CostBreakdown {
        generation,
        corrective,
    })
}

/// The assembled objective over the flat decision vector: separable
/// quadratic production cost plus one corrective term per period acting on
/// that period's total-wind variable.
pub struct DispatchObjective {
    /// Diagonal of the quadratic form (2a at unit variables, 0 elsewhere).
    quad_diag: DVector<f64>,
    linear: DVector<f64>,
    constant: f64,
    /// (variable index of w_t, regulation cost term for period t).
    corrective: Vec<(usize, CorrectiveCostTerm)>,
}

impl DispatchObjective {
    pub fn new(problem: &DispatchProblem, layout: &VariableLayout) -> Result<Self> {
        let n = layout.n_vars();
        let mut quad_diag = DVector::zeros(n);
        let mut linear = DVector::zeros(n);
        let mut constant = 0.0;
        for t in 0..layout.periods {
            for (i, u) in problem.non_agc.iter().enumerate() {
                let idx = layout.non_agc(i, t);
                quad_diag[idx] = 2.0 * u.cost_a;
                linear[idx] = u.cost_b;
                constant += u.cost_c;
            }
            for (j, u) in problem.agc.iter().enumerate() {
                let idx = layout.agc(j, t);
                quad_diag[idx] = 2.0 * u.cost_a;
                linear[idx] = u.cost_b;
                constant += u.cost_c;
            }
        }
        let s_plus: f64 = problem.agc.iter().map(|u| u.alpha * u.gamma_up).sum();
        let s_minus: f64 = problem.agc.iter().map(|u| u.alpha * u.gamma_down).sum();
        let mut corrective = Vec::new();
        if s_plus + s_minus > 0.0 {
            for t in 0..layout.periods {
                let aggregate = problem.aggregate_wind(t)?;
                let term = CorrectiveCostTerm::new(
                    s_plus,
                    s_minus,
                    &aggregate,
                    problem.forecasts[t].w_bar,
                )?;
                corrective.push((layout.total_wind(t), term));
            }
        }
        Ok(Self {
            quad_diag,
            linear,
            constant,
            corrective,
        })
    }

    pub fn corrective_terms(&self) -> impl Iterator<Item = &CorrectiveCostTerm> {
        self.corrective.iter().map(|(_, term)| term)
    }
}

impl Objective for DispatchObjective {
    fn value(&self, x: &DVector<f64>) -> f64 {
        let mut v = self.constant;
        for i in 0..x.len() {
            v += 0.5 * self.quad_diag[i] * x[i] * x[i] + self.linear[i] * x[i];
        }
        for &(idx, ref term) in &self.corrective {
            v += term.value_unchecked(x[idx]);
        }
        v
    }

    fn gradient(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        for i in 0..x.len() {
            out[i] = self.quad_diag[i] * x[i] + self.linear[i];
        }
        for &(idx, ref term) in &self.corrective {
            out[idx] += term.gradient(x[idx]);
        }
    }

    fn hessian(&self, x: &DVector<f64>, out: &mut DMatrix<f64>) {
        out.fill(0.0);
        for i in 0..x.len() {
            out[(i, i)] = self.quad_diag[i];
        }
        for &(idx, ref term) in &self.corrective {
            out[(idx, idx)] += term.second_derivative(x[idx]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::adaptive_simpson;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Cauchy as CauchySampler, Distribution};

    fn term(s_plus: f64, s_minus: f64, mu: f64, sigma: f64, w_bar: f64) -> CorrectiveCostTerm {
        let agg = UnivariateCauchy::new(mu, sigma).unwrap();
        CorrectiveCostTerm::new(s_plus, s_minus, &agg, w_bar).unwrap()
    }

    /// Direct numerical evaluation of the defining double of integrals:
    /// upward part over [0, w], downward part over [w, w_bar].
    fn quadrature_cost(
        s_plus: f64,
        s_minus: f64,
        mu: f64,
        sigma: f64,
        w_bar: f64,
        w: f64,
    ) -> f64 {
        let dist = UnivariateCauchy::new(mu, sigma).unwrap();
        let up = adaptive_simpson(&|x: f64| (w - x) * dist.pdf(x), 0.0, w, 1e-12);
        let down = adaptive_simpson(&|x: f64| (x - w) * dist.pdf(x), w, w_bar, 1e-12);
        s_plus * up + s_minus * down
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let cases = [
            (12.0, 24.0, 60.0, 4.0, 150.0),
            (5.0, 5.0, 10.0, 0.5, 40.0),
            (30.0, 1.0, 90.0, 15.0, 120.0),
            (0.0, 7.0, 25.0, 2.0, 80.0),
            (7.0, 0.0, 25.0, 2.0, 80.0),
        ];
        for &(sp, sm, mu, sigma, w_bar) in &cases {
            let t = term(sp, sm, mu, sigma, w_bar);
            for frac in [0.0, 0.1, 0.37, 0.5, 0.82, 1.0] {
                let w = frac * w_bar;
                let want = quadrature_cost(sp, sm, mu, sigma, w_bar, w);
                let got = t.value(w).unwrap();
                assert_relative_eq!(got, want, epsilon = 1e-9, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn closed_form_matches_monte_carlo() {
        // The integrand is bounded by max(s+, s-) * w_bar on a set of
        // bounded measure, so the sample mean obeys the CLT.
        let (sp, sm, mu, sigma, w_bar) = (12.0, 24.0, 55.0, 3.0, 140.0);
        let t = term(sp, sm, mu, sigma, w_bar);
        let w = 70.0;
        let mut rng = ChaCha8Rng::seed_from_u64(401);
        let sampler = CauchySampler::new(mu, sigma).unwrap();
        let n = 400_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..n {
            let x: f64 = sampler.sample(&mut rng);
            let cost = if (0.0..=w_bar).contains(&x) {
                sp * (w - x).max(0.0) + sm * (x - w).max(0.0)
            } else {
                0.0
            };
            sum += cost;
            sum_sq += cost * cost;
        }
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean).max(0.0);
        let se = (var / n as f64).sqrt();
        let got = t.value(w).unwrap();
        assert!(
            (got - mean).abs() <= 3.0 * se,
            "closed form {got} vs Monte Carlo {mean} +- {se}"
        );
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let t = term(9.0, 14.0, 40.0, 2.5, 100.0);
        let h = 1e-5;
        for w in [1.0, 20.0, 39.9, 40.0, 41.3, 75.0, 99.0] {
            let fd = (t.value_unchecked(w + h) - t.value_unchecked(w - h)) / (2.0 * h);
            assert_relative_eq!(t.gradient(w), fd, epsilon = 1e-7, max_relative = 1e-6);
            let fd2 = (t.gradient(w + h) - t.gradient(w - h)) / (2.0 * h);
            assert_relative_eq!(t.second_derivative(w), fd2, epsilon = 1e-6, max_relative = 1e-5);
        }
    }

    #[test]
    fn curvature_equals_price_sum_times_density() {
        let (sp, sm, mu, sigma) = (9.0, 14.0, 40.0, 2.5);
        let t = term(sp, sm, mu, sigma, 100.0);
        let dist = UnivariateCauchy::new(mu, sigma).unwrap();
        for w in [0.0, 12.5, 40.0, 63.0, 100.0] {
            assert_relative_eq!(
                t.second_derivative(w),
                (sp + sm) * dist.pdf(w),
                max_relative = 1e-12
            );
        }
        assert!(t.curvature_coefficient() > 0.0);
    }

    #[test]
    fn cost_is_non_negative_and_convex_on_domain() {
        let t = term(12.0, 24.0, 60.0, 4.0, 150.0);
        let mut prev_grad = f64::NEG_INFINITY;
        for i in 0..=300 {
            let w = 150.0 * i as f64 / 300.0;
            let v = t.value(w).unwrap();
            assert!(v >= -1e-12, "negative expected cost {v} at w = {w}");
            let g = t.gradient(w);
            assert!(g >= prev_grad - 1e-12, "gradient not monotone at w = {w}");
            prev_grad = g;
            assert!(t.second_derivative(w) > 0.0);
        }
    }

    #[test]
    fn value_rejects_points_outside_physical_range() {
        let t = term(1.0, 1.0, 10.0, 1.0, 50.0);
        assert!(t.value(-0.5).is_err());
        assert!(t.value(50.5).is_err());
        assert!(t.value(0.0).is_ok());
        assert!(t.value(50.0).is_ok());
    }

    #[test]
    fn vanishing_spread_recovers_piecewise_linear_cost() {
        // As the scale shrinks, the expectation collapses onto the point
        // forecast: pay s_plus per MW scheduled above it, s_minus per MW
        // below it.
        let (sp, sm, mu) = (12.0, 24.0, 60.0);
        let t = term(sp, sm, mu, 1e-9, 150.0);
        for w in [10.0, 59.0, 61.0, 140.0] {
            let want = sp * (w - mu).max(0.0) + sm * (mu - w).max(0.0);
            assert_abs_diff_eq!(t.value(w).unwrap(), want, epsilon = 1e-5);
        }
    }

    #[test]
    fn rejects_free_regulation_and_bad_bounds() {
        let agg = UnivariateCauchy::new(10.0, 1.0).unwrap();
        assert!(CorrectiveCostTerm::new(0.0, 0.0, &agg, 50.0).is_err());
        assert!(CorrectiveCostTerm::new(-1.0, 2.0, &agg, 50.0).is_err());
        assert!(CorrectiveCostTerm::new(1.0, 2.0, &agg, 0.0).is_err());
        assert!(CorrectiveCostTerm::new(1.0, 2.0, &agg, f64::INFINITY).is_err());
    }

    #[test]
    fn fleet_constructor_weights_prices_by_participation() {
        let agg = UnivariateCauchy::new(20.0, 2.0).unwrap();
        let mk = |alpha: f64, up: f64, down: f64| AgcUnit {
            name: "g".into(),
            bus: 0,
            p_min: 0.0,
            p_max: 100.0,
            ramp_up: f64::INFINITY,
            ramp_down: f64::INFINITY,
            cost_a: 0.0,
            cost_b: 0.0,
            cost_c: 0.0,
            alpha,
            gamma_up: up,
            gamma_down: down,
        };
        let fleet = [mk(0.75, 8.0, 16.0), mk(0.25, 20.0, 4.0)];
        let t = CorrectiveCostTerm::for_fleet(&fleet, &agg, 60.0).unwrap();
        assert_relative_eq!(t.s_plus(), 0.75 * 8.0 + 0.25 * 20.0);
        assert_relative_eq!(t.s_minus(), 0.75 * 16.0 + 0.25 * 4.0);
    }
}
