//! Chance-constrained real-time dispatch under heavy-tailed wind forecast errors.
//!
//! Short-horizon wind forecast errors are far heavier-tailed than a Gaussian:
//! a Cauchy (Student-t with one degree of freedom) fits observed error
//! histograms much better. Because the Cauchy family is stable under linear
//! combination and has closed-form distribution and quantile functions, every
//! probabilistic dispatch constraint can be converted into an exact
//! deterministic linear row, and the expected regulation cost of automatic
//! generation control (AGC) has a closed convex form. This crate implements
//! that pipeline end to end:
//!
//! * [`cauchy`]: univariate and multivariate Cauchy distributions, exact
//!   moment antiderivatives, deterministic heavy-tail sampling, and EM
//!   fitting of the multivariate model from error samples.
//! * [`network`]: DC power-flow model and power transfer distribution
//!   factors (PTDF) for line-flow constraints.
//! * [`model`]: the dispatch decision model; converts chance constraints on
//!   AGC capacity, AGC ramping, reserve, and transmission into deterministic
//!   linear rows and assembles a smooth convex program.
//! * [`solver`]: a deterministic log-barrier interior-point solver with
//!   phase-1 feasibility and KKT residual reporting.
//! * [`validation`]: Monte Carlo scenario validation of a schedule against
//!   the original probabilistic statements, security indices, and an
//!   independent sample-average estimate of the expected cost.
//! * [`io`]: JSON system files, CSV schedules and reports, and the rolling
//!   horizon driver behind the command-line interface.
//!
//! The crate is a library first; see the `examples/` directory for one
//! runnable example per capability, and `src/main.rs` for the thin CLI.

pub mod cauchy;
pub mod error;
pub mod io;
pub mod model;
pub mod network;
pub mod solver;
pub mod validation;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
