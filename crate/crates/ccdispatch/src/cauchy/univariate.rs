use std::f64::consts::{FRAC_1_PI, PI};

use crate::error::{Error, Result};

/// Univariate Cauchy distribution with location `mu` and scale `sigma > 0`.
///
/// Density: `f(x) = sigma / (pi * ((x - mu)^2 + sigma^2))`.
///
/// The Cauchy law has no mean or variance; location and scale are the only
/// parameters, and the family is closed under affine maps and under linear
/// combination of jointly Cauchy components. Both the distribution function
/// and its inverse are elementary, which is what makes exact deterministic
/// equivalents of probabilistic constraints possible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnivariateCauchy {
    location: f64,
    scale: f64,
}

impl UnivariateCauchy {
    /// Creates a Cauchy distribution. `scale` must be finite and strictly
    /// positive; `location` must be finite.
    pub fn new(location: f64, scale: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::Domain(format!(
                "Cauchy location must be finite, got {location}"
            )));
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::Domain(format!(
                "Cauchy scale must be finite and > 0, got {scale}"
            )));
        }
        Ok(Self { location, scale })
    }

    /// Standard Cauchy: location 0, scale 1.
    pub fn standard() -> Self {
        Self {
            location: 0.0,
            scale: 1.0,
        }
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Probability density at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        let d = x - self.location;
        FRAC_1_PI * self.scale / (d * d + self.scale * self.scale)
    }

    /// Distribution function `F(x) = atan((x - mu)/sigma)/pi + 1/2`.
    pub fn cdf(&self, x: f64) -> f64 {
        FRAC_1_PI * ((x - self.location) / self.scale).atan() + 0.5
    }

    /// Quantile `F^{-1}(p) = mu + sigma * tan(pi * (p - 1/2))` for
    /// `p` strictly inside (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "quantile level must lie strictly inside (0, 1), got {p}"
            )));
        }
        Ok(self.location + self.scale * (PI * (p - 0.5)).tan())
    }

    /// Antiderivative of `x * pdf(x)`, evaluated at `x`:
    ///
    /// `sigma/(2 pi) * ln(1 + ((x-mu)/sigma)^2) + mu/pi * atan((x-mu)/sigma)`.
    ///
    /// Differences of this function give partial first moments
    /// `int_a^b x f(x) dx` exactly; they are the log/arctan terms of the
    /// closed-form expected regulation cost.
    pub fn antiderivative_x_pdf(&self, x: f64) -> f64 {
        let u = (x - self.location) / self.scale;
        self.scale * FRAC_1_PI * 0.5 * (u * u).ln_1p()
            + self.location * FRAC_1_PI * u.atan()
    }

    /// Antiderivative of `x^2 * pdf(x)`, evaluated at `x`:
    ///
    /// `sigma/pi * (x-mu) + (mu^2 - sigma^2)/pi * atan((x-mu)/sigma)
    ///  + mu sigma/pi * ln(1 + ((x-mu)/sigma)^2)`.
    ///
    /// Differences give partial second moments over finite intervals; the
    /// full integral diverges, which the linear leading term makes visible.
    pub fn antiderivative_x_squared_pdf(&self, x: f64) -> f64 {
        let u = (x - self.location) / self.scale;
        self.scale * FRAC_1_PI * (x - self.location)
            + (self.location * self.location - self.scale * self.scale) * FRAC_1_PI * u.atan()
            + self.location * self.scale * FRAC_1_PI * (u * u).ln_1p()
    }

    /// Partial expectation `int_a^b x f(x) dx` via the closed antiderivative.
    pub fn partial_first_moment(&self, a: f64, b: f64) -> f64 {
        self.antiderivative_x_pdf(b) - self.antiderivative_x_pdf(a)
    }

    /// Probability mass of the interval `[a, b]`.
    pub fn interval_probability(&self, a: f64, b: f64) -> f64 {
        self.cdf(b) - self.cdf(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::adaptive_simpson;
    use approx::assert_relative_eq;

    #[test]
    fn rejects_bad_parameters() {
        assert!(UnivariateCauchy::new(0.0, 0.0).is_err());
        assert!(UnivariateCauchy::new(0.0, -1.0).is_err());
        assert!(UnivariateCauchy::new(f64::NAN, 1.0).is_err());
        assert!(UnivariateCauchy::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn standard_pdf_peak_is_one_over_pi() {
        let c = UnivariateCauchy::standard();
        assert_relative_eq!(c.pdf(0.0), FRAC_1_PI, max_relative = 1e-15);
    }

    #[test]
    fn pdf_value_and_numerical_normalization() {
        let c = UnivariateCauchy::new(0.0, 2.0).unwrap();
        // Spot value against the closed density.
        assert_relative_eq!(c.pdf(1.0), 2.0 / (5.0 * PI), max_relative = 1e-14);
        // Quadrature over [-R, R] must match the analytic mass 2/pi*atan(R/sigma),
        // which approaches 1 slowly because of the heavy tails.
        let r = 4000.0;
        let quad = adaptive_simpson(&|x| c.pdf(x), -r, r, 1e-10);
        let analytic = 2.0 * FRAC_1_PI * (r / 2.0).atan();
        assert_relative_eq!(quad, analytic, max_relative = 1e-8);
        assert!((1.0 - quad) < 0.001, "mass over wide grid = {quad}");
    }

    #[test]
    fn cdf_fixed_points() {
        let c = UnivariateCauchy::new(3.0, 2.0).unwrap();
        assert_relative_eq!(c.cdf(3.0), 0.5, max_relative = 1e-15);
        // One scale above the location sits at the upper quartile.
        assert_relative_eq!(c.cdf(5.0), 0.75, max_relative = 1e-15);
        assert_relative_eq!(c.cdf(1.0), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn quantile_round_trips_cdf() {
        let c = UnivariateCauchy::new(-1.5, 0.7).unwrap();
        for &p in &[0.001, 0.02, 0.25, 0.5, 0.75, 0.98, 0.999] {
            let x = c.quantile(p).unwrap();
            assert_relative_eq!(c.cdf(x), p, epsilon = 1e-12);
        }
    }

    #[test]
    fn quantile_rejects_boundary_levels() {
        let c = UnivariateCauchy::standard();
        assert!(c.quantile(0.0).is_err());
        assert!(c.quantile(1.0).is_err());
        assert!(c.quantile(-0.1).is_err());
        assert!(c.quantile(1.1).is_err());
    }

    #[test]
    fn high_quantile_matches_bisection_oracle() {
        // Independent oracle: bisect the cdf, which never touches tan().
        let c = UnivariateCauchy::standard();
        let target = 0.98;
        let (mut lo, mut hi) = (0.0, 1.0e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if c.cdf(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let q = c.quantile(target).unwrap();
        assert_relative_eq!(q, oracle, max_relative = 1e-9);
        // Frozen reference for the 2% tail multiplier used throughout the
        // deterministic constraint conversions.
        assert_relative_eq!(q, 15.894544843865, max_relative = 1e-10);
    }

    #[test]
    fn antiderivative_x_pdf_matches_quadrature() {
        let c = UnivariateCauchy::new(1.0, 2.0).unwrap();
        for &(a, b) in &[(-3.0, 2.0), (0.0, 1.0), (-10.0, 30.0), (1.0, 1.0)] {
            let quad = adaptive_simpson(&|x| x * c.pdf(x), a, b, 1e-11);
            let closed = c.partial_first_moment(a, b);
            assert_relative_eq!(closed, quad, epsilon = 1e-8);
        }
    }

    #[test]
    fn antiderivative_x_squared_pdf_matches_quadrature() {
        let c = UnivariateCauchy::new(1.0, 2.0).unwrap();
        for &(a, b) in &[(-3.0, 2.0), (0.5, 4.5), (-20.0, 15.0)] {
            let quad = adaptive_simpson(&|x| x * x * c.pdf(x), a, b, 1e-11);
            let closed = c.antiderivative_x_squared_pdf(b) - c.antiderivative_x_squared_pdf(a);
            assert_relative_eq!(closed, quad, epsilon = 1e-8);
        }
    }

    #[test]
    fn standard_second_moment_on_unit_interval_frozen_value() {
        // int_{-1}^{1} x^2 f(x) dx for the standard Cauchy is 2/pi - 1/2.
        let c = UnivariateCauchy::standard();
        let closed =
            c.antiderivative_x_squared_pdf(1.0) - c.antiderivative_x_squared_pdf(-1.0);
        assert_relative_eq!(closed, 2.0 * FRAC_1_PI - 0.5, epsilon = 1e-8);
        assert_relative_eq!(closed, 0.13661977236758, epsilon = 1e-8);
    }

    #[test]
    fn antiderivatives_differentiate_back_to_integrands() {
        let c = UnivariateCauchy::new(-2.0, 0.5).unwrap();
        let h = 1e-5;
        let mut x = -6.0;
        while x <= 6.0 {
            let d1 = (c.antiderivative_x_pdf(x + h) - c.antiderivative_x_pdf(x - h)) / (2.0 * h);
            assert_relative_eq!(d1, x * c.pdf(x), epsilon = 1e-6, max_relative = 1e-6);
            let d2 = (c.antiderivative_x_squared_pdf(x + h)
                - c.antiderivative_x_squared_pdf(x - h))
                / (2.0 * h);
            assert_relative_eq!(d2, x * x * c.pdf(x), epsilon = 1e-6, max_relative = 1e-6);
            x += 0.25;
        }
    }
}
