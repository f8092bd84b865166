//! Cauchy (Student-t, one degree of freedom) distribution toolkit: the
//! heavy-tailed model for short-horizon wind forecast errors.
//!
//! The univariate type carries the closed-form density, distribution,
//! quantile, and the moment antiderivatives used by the analytic expected
//! regulation cost. The multivariate type adds the stability property
//! (linear combinations stay Cauchy), deterministic sampling, and EM
//! fitting from error data.

mod fit;
mod multivariate;
mod univariate;

pub use fit::{fit_mv_cauchy, histogram_rmse, log_likelihood, FitResult};
pub use multivariate::MultivariateCauchy;
pub use univariate::UnivariateCauchy;
