use thiserror::Error;

/// Errors raised by the statistics, network, model, solver, and validation layers.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch in {what}: expected {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A scale matrix that must be symmetric positive definite is not,
    /// even after the one-shot diagonal jitter.
    #[error("matrix not positive definite: {0}")]
    NotPositiveDefinite(String),

    /// A linear system that must be solvable is singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// The grid graph is not connected.
    #[error("islanded grid: bus {0} is not connected to the slack bus")]
    Islanded(usize),

    /// Nodal injections do not sum to zero.
    #[error("injections do not balance: net {0} MW")]
    Unbalanced(f64),

    /// A linear combination with an all-zero weight vector has no distribution.
    #[error("degenerate combination: {0}")]
    Degenerate(String),

    /// Too few samples for the requested estimation.
    #[error("insufficient data: need more than {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// The model constraints admit no feasible point; rows that remain
    /// violated at the phase-1 optimum are listed by name.
    #[error("infeasible model: violated rows: {}", .0.join(", "))]
    Infeasible(Vec<String>),

    /// The objective Hessian showed negative curvature along a search
    /// direction; the problem handed to the solver is not convex.
    #[error("convexity violation: negative curvature {0:.3e} along search direction")]
    ConvexityViolation(f64),

    /// A numerical step (factorization, line search) failed beyond recovery.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The requested quantity is undefined for this input.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A problem definition failed semantic validation.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// Reading or writing a file failed.
    #[error("io error: {0}")]
    Io(String),

    /// A system, schedule, or sample file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
