//! Maximum-likelihood fitting of the multivariate Cauchy model from
//! forecast-error samples, via expectation-maximization for the Student-t
//! family with the degrees of freedom pinned at one.
//!
//! Each iteration reweights samples by `(1 + K) / (1 + d_i)` where `d_i` is
//! the squared Mahalanobis distance under the current parameters, then takes
//! weighted location and scatter updates. Distant samples get weights that
//! decay like `1/d_i`, which is exactly the robustness the heavy-tailed
//! model needs: a handful of extreme errors cannot drag the fit.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

use super::MultivariateCauchy;

/// Outcome of an EM fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub distribution: MultivariateCauchy,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Total log-likelihood of `samples` (rows) under `dist`.
pub fn log_likelihood(dist: &MultivariateCauchy, samples: &DMatrix<f64>) -> Result<f64> {
    let mut total = 0.0;
    let mut x = DVector::zeros(samples.ncols());
    for i in 0..samples.nrows() {
        for c in 0..samples.ncols() {
            x[c] = samples[(i, c)];
        }
        total += dist.ln_pdf(&x)?;
    }
    Ok(total)
}

/// Fits a multivariate Cauchy to the rows of `samples` by EM.
///
/// Initialization is robust: coordinate-wise medians for the location and a
/// diagonal scale from `(1.4826 * MAD)^2` (floored when samples carry no
/// spread at all). Convergence is declared when the relative log-likelihood
/// change drops below `tolerance`; `max_iterations` caps the loop, in which
/// case the result is returned with `converged = false`.
pub fn fit_mv_cauchy(
    samples: &DMatrix<f64>,
    tolerance: f64,
    max_iterations: usize,
) -> Result<FitResult> {
    let n = samples.nrows();
    let k = samples.ncols();
    if k == 0 {
        return Err(Error::Domain("samples must have at least one column".into()));
    }
    if n <= k + 1 {
        return Err(Error::InsufficientData { needed: k + 1, got: n });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("samples must be finite".into()));
    }
    if !(tolerance > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be > 0, got {tolerance}"
        )));
    }

    let mut current = robust_initial(samples)?;
    let mut ll = log_likelihood(&current, samples)?;
    for iter in 1..=max_iterations {
        current = em_iterate(samples, &current)?;
        let ll_new = log_likelihood(&current, samples)?;
        let rel = (ll_new - ll).abs() / ll_new.abs().max(1.0);
        ll = ll_new;
        if rel < tolerance {
            return Ok(FitResult {
                distribution: current,
                log_likelihood: ll,
                iterations: iter,
                converged: true,
            });
        }
    }
    Ok(FitResult {
        distribution: current,
        log_likelihood: ll,
        iterations: max_iterations,
        converged: false,
    })
}

/// One EM step: weights from the current parameters, then weighted mean and
/// weighted scatter (normalized by `n`, the update for fixed unit degrees
/// of freedom).
pub(crate) fn em_iterate(
    samples: &DMatrix<f64>,
    current: &MultivariateCauchy,
) -> Result<MultivariateCauchy> {
    let n = samples.nrows();
    let k = samples.ncols();
    let mut weights = vec![0.0; n];
    let mut x = DVector::zeros(k);
    for i in 0..n {
        for c in 0..k {
            x[c] = samples[(i, c)];
        }
        let d = current.mahalanobis_squared(&x);
        weights[i] = (1.0 + k as f64) / (1.0 + d);
    }
    let weight_sum: f64 = weights.iter().sum();
    let mut mu = DVector::zeros(k);
    for i in 0..n {
        for c in 0..k {
            mu[c] += weights[i] * samples[(i, c)];
        }
    }
    mu /= weight_sum;

    let mut sigma = DMatrix::zeros(k, k);
    for i in 0..n {
        for r in 0..k {
            let dr = samples[(i, r)] - mu[r];
            for c in r..k {
                sigma[(r, c)] += weights[i] * dr * (samples[(i, c)] - mu[c]);
            }
        }
    }
    sigma /= n as f64;
    for r in 0..k {
        for c in 0..r {
            sigma[(r, c)] = sigma[(c, r)];
        }
    }
    MultivariateCauchy::new(mu, sigma)
}

fn robust_initial(samples: &DMatrix<f64>) -> Result<MultivariateCauchy> {
    let k = samples.ncols();
    let mut mu = DVector::zeros(k);
    let mut sigma = DMatrix::zeros(k, k);
    for c in 0..k {
        let col: Vec<f64> = samples.column(c).iter().copied().collect();
        let med = median(col.clone());
        mu[c] = med;
        let deviations: Vec<f64> = col.iter().map(|v| (v - med).abs()).collect();
        let mad = median(deviations);
        let spread = (1.4826 * mad).max(1e-6);
        sigma[(c, c)] = spread * spread;
    }
    MultivariateCauchy::new(mu, sigma)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Root-mean-square gap between a candidate density and the
/// density-normalized histogram of `samples`, over `bins` equal-width bins
/// spanning the sample range. Used to compare how well competing densities
/// explain the same error data.
pub fn histogram_rmse(pdf: impl Fn(f64) -> f64, samples: &[f64], bins: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if bins == 0 {
        return Err(Error::Domain("bin count must be at least 1".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("samples must be finite".into()));
    }
    let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Err(Error::Domain(
            "all samples identical: histogram has zero width".into(),
        ));
    }
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let idx = (((s - min) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let n = samples.len() as f64;
    let mut sq_sum = 0.0;
    for (b, &count) in counts.iter().enumerate() {
        let center = min + (b as f64 + 0.5) * width;
        let density = count as f64 / (n * width);
        let gap = pdf(center) - density;
        sq_sum += gap * gap;
    }
    Ok((sq_sum / bins as f64).sqrt())
}
