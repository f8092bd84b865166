use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

use super::UnivariateCauchy;

/// Multivariate Cauchy distribution: a multivariate Student-t with one
/// degree of freedom, location vector `mu` and symmetric positive definite
/// scale matrix `Sigma`.
///
/// Density for dimension `p`:
///
/// ```text
/// f(x) = Gamma((1+p)/2) / ( Gamma(1/2) pi^{p/2} |Sigma|^{1/2}
///        [1 + (x-mu)^T Sigma^{-1} (x-mu)]^{(1+p)/2} )
/// ```
///
/// The family is stable: for any non-zero weight vector `a`, the scalar
/// `a^T x` is univariate Cauchy with location `a^T mu` and scale
/// `sqrt(a^T Sigma a)`. Marginals are the special case of a unit weight on
/// one coordinate. Stability is what collapses joint chance constraints
/// into univariate quantile evaluations with no integration.
#[derive(Debug, Clone)]
pub struct MultivariateCauchy {
    location: DVector<f64>,
    scale: DMatrix<f64>,
    /// Lower Cholesky factor of `scale` (after the jitter policy, if applied).
    chol_l: DMatrix<f64>,
}

/// Cholesky with the shared repair policy for marginally indefinite inputs:
/// on failure, add `1e-10 * trace/K` to the diagonal once (an absolute
/// `1e-10` when the trace itself vanishes) and retry; a second failure is an
/// error. Returns the lower factor and the possibly jittered matrix.
pub(crate) fn spd_cholesky(
    m: &DMatrix<f64>,
    what: &str,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if let Some(ch) = nalgebra::Cholesky::new(m.clone()) {
        return Ok((ch.unpack(), m.clone()));
    }
    let k = m.nrows() as f64;
    let mut jitter = 1e-10 * m.trace() / k;
    if !(jitter > 0.0) {
        jitter = 1e-10;
    }
    let mut repaired = m.clone();
    for i in 0..m.nrows() {
        repaired[(i, i)] += jitter;
    }
    match nalgebra::Cholesky::new(repaired.clone()) {
        Some(ch) => Ok((ch.unpack(), repaired)),
        None => Err(Error::NotPositiveDefinite(what.to_string())),
    }
}

impl MultivariateCauchy {
    /// Creates a multivariate Cauchy from a location vector and a scale
    /// matrix. The scale must be square with matching dimension, symmetric
    /// to `1e-12` (relative to its largest entry), and positive definite
    /// up to the one-shot jitter policy.
    pub fn new(location: DVector<f64>, scale: DMatrix<f64>) -> Result<Self> {
        let k = location.len();
        if k == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if scale.nrows() != k || scale.ncols() != k {
            return Err(Error::DimensionMismatch {
                what: "scale matrix",
                expected: k,
                actual: scale.nrows().max(scale.ncols()),
            });
        }
        if location.iter().any(|v| !v.is_finite())
            || scale.iter().any(|v| !v.is_finite())
        {
            return Err(Error::Domain("location and scale must be finite".into()));
        }
        let mag = scale.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..k {
            for j in (i + 1)..k {
                if (scale[(i, j)] - scale[(j, i)]).abs() > 1e-12 * mag.max(1.0) {
                    return Err(Error::Domain(format!(
                        "scale matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let (chol_l, scale) = spd_cholesky(&scale, "multivariate Cauchy scale")?;
        Ok(Self {
            location,
            scale,
            chol_l,
        })
    }

    /// Joint distribution of independent-parameter blocks sharing one
    /// heavy-tail mixing variable: locations concatenate and scales form a
    /// block diagonal. Linear combinations across blocks then combine
    /// scales in quadrature, matching the cross-period ramping model.
    pub fn block_diagonal(blocks: &[&MultivariateCauchy]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Domain("block_diagonal needs at least one block".into()));
        }
        let total: usize = blocks.iter().map(|b| b.dimension()).sum();
        let mut location = DVector::zeros(total);
        let mut scale = DMatrix::zeros(total, total);
        let mut off = 0;
        for b in blocks {
            let k = b.dimension();
            location.rows_mut(off, k).copy_from(&b.location);
            scale.view_mut((off, off), (k, k)).copy_from(&b.scale);
            off += k;
        }
        Self::new(location, scale)
    }

    pub fn dimension(&self) -> usize {
        self.location.len()
    }

    pub fn location(&self) -> &DVector<f64> {
        &self.location
    }

    pub fn scale(&self) -> &DMatrix<f64> {
        &self.scale
    }

    /// Probability density at `x`.
    pub fn pdf(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.ln_pdf(x)?.exp())
    }

    /// Natural log of the density at `x`; the stable form for likelihoods.
    pub fn ln_pdf(&self, x: &DVector<f64>) -> Result<f64> {
        let p = self.dimension();
        if x.len() != p {
            return Err(Error::DimensionMismatch {
                what: "pdf point",
                expected: p,
                actual: x.len(),
            });
        }
        let d = self.mahalanobis_squared(x);
        let half_p1 = 0.5 * (1.0 + p as f64);
        let mut ln_det_sqrt = 0.0;
        for i in 0..p {
            ln_det_sqrt += self.chol_l[(i, i)].ln();
        }
        Ok(ln_gamma_ratio_to_half(p) - 0.5 * (p as f64) * PI.ln() - ln_det_sqrt
            - half_p1 * d.ln_1p())
    }

    /// Squared Mahalanobis distance `(x-mu)^T Sigma^{-1} (x-mu)` via the
    /// Cholesky factor. Dimensions must already agree.
    pub(crate) fn mahalanobis_squared(&self, x: &DVector<f64>) -> f64 {
        let mut v = x - &self.location;
        self.chol_l.solve_lower_triangular_mut(&mut v);
        v.norm_squared()
    }

    /// Marginal distribution of coordinate `k`.
    pub fn marginal(&self, k: usize) -> Result<UnivariateCauchy> {
        if k >= self.dimension() {
            return Err(Error::DimensionMismatch {
                what: "marginal index",
                expected: self.dimension(),
                actual: k,
            });
        }
        UnivariateCauchy::new(self.location[k], self.scale[(k, k)].sqrt())
    }

    /// Distribution of `a^T x` by the stability property:
    /// `Cauchy(a^T mu, sqrt(a^T Sigma a))`. An all-zero `a` has no
    /// distribution and is rejected.
    pub fn linear_combination(&self, a: &DVector<f64>) -> Result<UnivariateCauchy> {
        if a.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                what: "combination weights",
                expected: self.dimension(),
                actual: a.len(),
            });
        }
        if a.iter().all(|&v| v == 0.0) {
            return Err(Error::Degenerate(
                "all-zero weight vector has no distribution".into(),
            ));
        }
        let variance_form = (a.transpose() * &self.scale * a)[(0, 0)];
        if !(variance_form > 0.0) {
            return Err(Error::Degenerate(format!(
                "non-positive combined scale {variance_form}"
            )));
        }
        UnivariateCauchy::new(self.location.dot(a), variance_form.sqrt())
    }

    /// Draws `n` samples as the rows of an `n x K` matrix.
    ///
    /// Each sample is `mu + L z / |g|` with `z` standard normal in `K`
    /// dimensions and `g` a scalar standard normal: a normal variance-mixture
    /// draw whose mixing variable is shared across coordinates. Row `i`
    /// depends only on `(seed, i)`, so any partition of the row range over
    /// workers reproduces the serial output bit for bit.
    pub fn sample(&self, n: usize, seed: u64) -> DMatrix<f64> {
        let k = self.dimension();
        let mut out = DMatrix::zeros(n, k);
        let mut z = DVector::zeros(k);
        for i in 0..n {
            self.sample_row_into(seed, i, &mut z, &mut out, i);
        }
        out
    }

    /// Writes sample `index` of the stream identified by `seed` into row
    /// `row` of `out`. Depends only on `(seed, index)`.
    pub(crate) fn sample_row_into(
        &self,
        seed: u64,
        index: usize,
        z: &mut DVector<f64>,
        out: &mut DMatrix<f64>,
        row: usize,
    ) {
        let k = self.dimension();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let g: f64 = loop {
            let v: f64 = rng.sample(StandardNormal);
            if v != 0.0 {
                break v;
            }
        };
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let scaled = &self.chol_l * &*z / g.abs();
        for c in 0..k {
            out[(row, c)] = self.location[c] + scaled[c];
        }
    }
}

/// `ln( Gamma((1+p)/2) / Gamma(1/2) )` computed exactly by parity, avoiding
/// any gamma-function dependency. For odd `p` the numerator argument is an
/// integer; for even `p` the half-integer ratio telescopes.
fn ln_gamma_ratio_to_half(p: usize) -> f64 {
    if p % 2 == 1 {
        let n = (1 + p) / 2;
        let mut s = 0.0;
        for i in 1..n {
            s += (i as f64).ln();
        }
        s - 0.5 * PI.ln()
    } else {
        let m = p / 2;
        let mut s = 0.0;
        for i in 0..m {
            s += (0.5 + i as f64).ln();
        }
        s
    }
}
