//! Interior-point solver for the smooth convex programs built by the model
//! layer.
//!
//! The method is a log-barrier scheme. Box bounds are folded into the
//! inequality rows, a phase-1 subproblem minimizes the worst violation to
//! find a strictly feasible start (or an infeasibility certificate naming
//! the blocking rows), and phase 2 follows the central path with Newton
//! steps on `t f(x) + barrier(x)` under the equality constraints. Each KKT
//! system is solved through a Schur complement on the equality block, with
//! a dense factorization of the full system as fallback. The solver is
//! fully deterministic: no randomness, no time-dependent behavior.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{ConvexProgram, Objective};

/// Tunables; the defaults suit the dispatch problems in this crate.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Target for the reported KKT residuals.
    pub kkt_tolerance: f64,
    /// Total Newton iteration budget across both phases.
    pub max_iterations: usize,
    /// Factor applied to the barrier parameter between outer stages.
    pub barrier_reduction: f64,
    /// Step shrink factor inside the line search.
    pub backtrack: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            kkt_tolerance: 1e-6,
            max_iterations: 200,
            barrier_reduction: 0.2,
            backtrack: 0.5,
        }
    }
}

/// Residuals of the first-order optimality system at the returned point.
#[derive(Debug, Clone, Copy)]
pub struct KktResiduals {
    /// Infinity norm of `grad f + G^T z + A^T lambda`.
    pub stationarity: f64,
    /// Worst violation of rows, bounds, and equalities.
    pub primal_feasibility: f64,
    /// Largest product of an inequality dual and its slack.
    pub complementarity: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// No point satisfies all rows. The payload names rows that block
    /// feasibility; when the region is non-empty but has no interior, the
    /// tight rows are named instead.
    Infeasible { violated_rows: Vec<String> },
    IterationLimit,
}

/// Result of a solve. `x` is the best point found; duals pair each row
/// name with its multiplier, inequality duals in folded order (explicit
/// rows, then upper bounds, then lower bounds).
pub struct Solution {
    pub status: SolveStatus,
    pub x: DVector<f64>,
    pub objective: f64,
    pub newton_iterations: usize,
    pub inequality_duals: Vec<(String, f64)>,
    pub equality_duals: Vec<(String, f64)>,
    pub kkt: KktResiduals,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Inequality rows and finite bounds flattened into one `G x <= h` list.
struct FoldedRows {
    coeffs: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
    names: Vec<String>,
}

impl FoldedRows {
    fn from_program(p: &ConvexProgram) -> Self {
        let mut coeffs = Vec::new();
        let mut rhs = Vec::new();
        let mut names = Vec::new();
        for row in &p.inequalities {
            coeffs.push(row.coeffs.clone());
            rhs.push(row.rhs);
            names.push(row.name.clone());
        }
        for i in 0..p.n_vars {
            if p.upper[i].is_finite() {
                coeffs.push(vec![(i, 1.0)]);
                rhs.push(p.upper[i]);
                names.push(format!("bound-hi[{}]", p.var_names[i]));
            }
        }
        for i in 0..p.n_vars {
            if p.lower[i].is_finite() {
                coeffs.push(vec![(i, -1.0)]);
                rhs.push(-p.lower[i]);
                names.push(format!("bound-lo[{}]", p.var_names[i]));
            }
        }
        Self { coeffs, rhs, names }
    }

    fn len(&self) -> usize {
        self.rhs.len()
    }

    fn row_dot(&self, r: usize, x: &DVector<f64>) -> f64 {
        self.coeffs[r].iter().map(|&(i, c)| c * x[i]).sum()
    }

    /// Slacks `h - G x`; `None` when some slack is not strictly positive.
    fn strict_slacks(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let mut s = DVector::zeros(self.len());
        for r in 0..self.len() {
            s[r] = self.rhs[r] - self.row_dot(r, x);
            if !(s[r] > 0.0) {
                return None;
            }
        }
        Some(s)
    }

    fn worst_violation(&self, x: &DVector<f64>) -> f64 {
        (0..self.len())
            .map(|r| self.row_dot(r, x) - self.rhs[r])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Dense equality system `A x = b` with row names.
struct EqualitySystem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    names: Vec<String>,
}

impl EqualitySystem {
    fn from_program(p: &ConvexProgram) -> Self {
        let m = p.equalities.len();
        let mut a = DMatrix::zeros(m, p.n_vars);
        let mut b = DVector::zeros(m);
        let mut names = Vec::with_capacity(m);
        for (r, row) in p.equalities.iter().enumerate() {
            for &(i, c) in &row.coeffs {
                a[(r, i)] += c;
            }
            b[r] = row.rhs;
            names.push(row.name.clone());
        }
        Self { a, b, names }
    }

    /// Minimum-norm solution of `A x = b` (zero when there are no rows).
    fn least_norm_point(&self) -> Result<DVector<f64>> {
        let m = self.a.nrows();
        let n = self.a.ncols();
        if m == 0 {
            return Ok(DVector::zeros(n));
        }
        // Solve (A A^T) y = b, x = A^T y, with a whisper of regularization
        // in case rows are dependent.
        let mut gram = &self.a * self.a.transpose();
        let scale = gram.diagonal().amax().max(1.0);
        for i in 0..m {
            gram[(i, i)] += 1e-12 * scale;
        }
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::Singular("equality rows are badly dependent".into()))?;
        let y = chol.solve(&self.b);
        Ok(self.a.transpose() * y)
    }
}

/// One barrier subproblem: minimize `objective` subject to the rows and
/// equalities, starting strictly feasible.
struct BarrierCore<'a> {
    objective: &'a dyn Objective,
    rows: &'a FoldedRows,
    eq: &'a EqualitySystem,
    n: usize,
}

struct StageOutcome {
    x: DVector<f64>,
    nu: DVector<f64>,
    mu: f64,
    /// False when the iteration budget ran out first.
    converged: bool,
    stopped_early: bool,
}

impl<'a> BarrierCore<'a> {
    /// Follows the central path from `x0`. `iterations` is a shared budget
    /// counter; `stop_early` short-circuits the whole solve (used by
    /// phase 1 the moment strict feasibility is certain).
    fn minimize(
        &self,
        x0: DVector<f64>,
        opts: &SolverOptions,
        iterations: &mut usize,
        stop_early: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Result<StageOutcome> {
        let p = self.eq.a.nrows();
        let mut x = x0;
        let mut nu = DVector::zeros(p);
        let mut mu: f64 = 1.0;
        let eq_scale = self.eq.b.amax().max(1.0);
        let pure_equality = self.rows.len() == 0;
        loop {
            let t = 1.0 / mu;
            // Inner Newton loop for this barrier stage.
            loop {
                if stop_early(&x) {
                    return Ok(StageOutcome {
                        x,
                        nu,
                        mu,
                        converged: true,
                        stopped_early: true,
                    });
                }
                let slacks = self.rows.strict_slacks(&x).ok_or_else(|| {
                    Error::Numerical("iterate left the strictly feasible region".into())
                })?;
                let (r_dual, r_pri) = self.residuals(t, &x, &nu, &slacks);
                let stage_tol = if pure_equality {
                    opts.kkt_tolerance
                } else {
                    (0.1 * mu).max(0.25 * opts.kkt_tolerance)
                };
                let stationarity = r_dual.amax() / t;
                if stationarity <= stage_tol && r_pri.amax() <= 1e-9 * eq_scale {
                    break;
                }
                if *iterations >= opts.max_iterations {
                    return Ok(StageOutcome {
                        x,
                        nu,
                        mu,
                        converged: false,
                        stopped_early: false,
                    });
                }
                *iterations += 1;
                let (dx, dnu) = self.newton_direction(t, &x, &slacks, &r_dual, &r_pri)?;
                // Guard against a non-convex objective sneaking in.
                let mut hf = DMatrix::zeros(self.n, self.n);
                self.objective.hessian(&x, &mut hf);
                let curv = (hf * &dx).dot(&dx);
                let dx_norm2 = dx.norm_squared();
                if curv < -1e-8 * dx_norm2 {
                    return Err(Error::ConvexityViolation(curv / dx_norm2.max(1e-300)));
                }
                // Largest step keeping every slack strictly positive.
                let mut alpha_max = f64::INFINITY;
                for r in 0..self.rows.len() {
                    let gd: f64 = self.rows.coeffs[r].iter().map(|&(i, c)| c * dx[i]).sum();
                    if gd > 0.0 {
                        alpha_max = alpha_max.min(slacks[r] / gd);
                    }
                }
                let mut alpha = (0.99 * alpha_max).min(1.0);
                // Backtrack on the norm of the full KKT residual.
                let r0 = Self::stacked_norm(&r_dual, &r_pri);
                let mut stalled = false;
                loop {
                    let x_trial = &x + alpha * &dx;
                    let nu_trial = &nu + alpha * &dnu;
                    if let Some(s_trial) = self.rows.strict_slacks(&x_trial) {
                        let (rd, rp) = self.residuals(t, &x_trial, &nu_trial, &s_trial);
                        if Self::stacked_norm(&rd, &rp) <= (1.0 - 0.01 * alpha) * r0 {
                            x = x_trial;
                            nu = nu_trial;
                            break;
                        }
                    }
                    alpha *= opts.backtrack;
                    if alpha < 1e-13 {
                        stalled = true;
                        break;
                    }
                }
                if stalled {
                    // Arithmetic cannot improve this stage's residual any
                    // further; move on to the next barrier stage rather
                    // than burning the budget here. The final status is
                    // judged from the measured first-order residuals.
                    break;
                }
            }
            if pure_equality || mu <= 0.9 * opts.kkt_tolerance {
                return Ok(StageOutcome {
                    x,
                    nu,
                    mu,
                    converged: true,
                    stopped_early: false,
                });
            }
            mu *= opts.barrier_reduction;
        }
    }

    fn stacked_norm(r_dual: &DVector<f64>, r_pri: &DVector<f64>) -> f64 {
        (r_dual.norm_squared() + r_pri.norm_squared()).sqrt()
    }

    /// Dual and primal residuals of the stage problem at `(x, nu)`.
    fn residuals(
        &self,
        t: f64,
        x: &DVector<f64>,
        nu: &DVector<f64>,
        slacks: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        let mut r_dual = DVector::zeros(self.n);
        self.objective.gradient(x, &mut r_dual);
        r_dual *= t;
        for r in 0..self.rows.len() {
            let w = 1.0 / slacks[r];
            for &(i, c) in &self.rows.coeffs[r] {
                r_dual[i] += c * w;
            }
        }
        if self.eq.a.nrows() > 0 {
            r_dual += self.eq.a.transpose() * nu;
        }
        let r_pri = if self.eq.a.nrows() > 0 {
            &self.eq.a * x - &self.eq.b
        } else {
            DVector::zeros(0)
        };
        (r_dual, r_pri)
    }

    /// Solves the KKT system for the Newton direction.
    fn newton_direction(
        &self,
        t: f64,
        x: &DVector<f64>,
        slacks: &DVector<f64>,
        r_dual: &DVector<f64>,
        r_pri: &DVector<f64>,
    ) -> Result<(DVector<f64>, DVector<f64>)> {
        let n = self.n;
        let p = self.eq.a.nrows();
        let mut h = DMatrix::zeros(n, n);
        self.objective.hessian(x, &mut h);
        h *= t;
        // Barrier curvature, accumulated row by row.
        for r in 0..self.rows.len() {
            let w = 1.0 / (slacks[r] * slacks[r]);
            for &(i, ci) in &self.rows.coeffs[r] {
                for &(j, cj) in &self.rows.coeffs[r] {
                    h[(i, j)] += ci * cj * w;
                }
            }
        }
        let reg = 1e-12 * (1.0 + h.diagonal().amax());
        for i in 0..n {
            h[(i, i)] += reg;
        }
        if p == 0 {
            let chol = h
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Singular("Newton system is not positive definite".into()))?;
            return Ok((chol.solve(&(-r_dual)), DVector::zeros(0)));
        }
        // Schur complement on the equality block; fall back to factoring
        // the full saddle system if the reduced solve fails.
        if let Some(chol) = h.clone().cholesky() {
            let hi_at = chol.solve(&self.eq.a.transpose()); // n x p
            let hi_rd = chol.solve(r_dual); // n
            let mut schur = &self.eq.a * &hi_at; // p x p
            let s_reg = 1e-12 * (1.0 + schur.diagonal().amax());
            for i in 0..p {
                schur[(i, i)] += s_reg;
            }
            if let Some(s_chol) = schur.cholesky() {
                let rhs = r_pri - &self.eq.a * &hi_rd;
                let dnu = s_chol.solve(&rhs);
                let dx = -(&hi_rd + &hi_at * &dnu);
                return Ok((dx, dnu));
            }
        }
        let dim = n + p;
        let mut kkt = DMatrix::zeros(dim, dim);
        kkt.view_mut((0, 0), (n, n)).copy_from(&h);
        kkt.view_mut((0, n), (n, p)).copy_from(&self.eq.a.transpose());
        kkt.view_mut((n, 0), (p, n)).copy_from(&self.eq.a);
        for i in 0..p {
            kkt[(n + i, n + i)] = -1e-10;
        }
        let mut rhs = DVector::zeros(dim);
        rhs.rows_mut(0, n).copy_from(&(-r_dual));
        rhs.rows_mut(n, p).copy_from(&(-r_pri));
        let lu = kkt.lu();
        let step = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Singular("saddle-point system is singular".into()))?;
        Ok((
            step.rows(0, n).clone_owned(),
            step.rows(n, p).clone_owned(),
        ))
    }
}

/// Minimizes the program's objective over its rows and bounds.
///
/// Errors are reserved for structural or numerical failures; lack of a
/// feasible point is reported through `SolveStatus::Infeasible` with the
/// blocking row names, and an exhausted iteration budget through
/// `SolveStatus::IterationLimit` with the best iterate found.
pub fn solve(program: &ConvexProgram, opts: &SolverOptions) -> Result<Solution> {
    program.audit()?;
    if !(opts.kkt_tolerance > 0.0)
        || !(opts.barrier_reduction > 0.0 && opts.barrier_reduction < 1.0)
        || !(opts.backtrack > 0.0 && opts.backtrack < 1.0)
    {
        return Err(Error::Domain(
            "solver options out of range: tolerance > 0, reduction and backtrack in (0, 1)".into(),
        ));
    }
    let rows = FoldedRows::from_program(program);
    let eq = EqualitySystem::from_program(program);
    let n = program.n_vars;
    let mut iterations = 0usize;

    // Phase 1: find a strictly feasible point, or certify there is none.
    let x_start = eq.least_norm_point()?;
    let x_feasible = if rows.len() == 0 {
        x_start
    } else {
        let h_scale = rows.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let feas_tol = 1e-6 * h_scale;
        match phase_one(
            &rows,
            &eq,
            program,
            x_start,
            feas_tol,
            opts,
            &mut iterations,
        )? {
            PhaseOneResult::Feasible(x) => x,
            PhaseOneResult::Infeasible(violated_rows) => {
                return Ok(build_solution(
                    program,
                    &rows,
                    &eq,
                    SolveStatus::Infeasible { violated_rows },
                    DVector::zeros(n),
                    DVector::zeros(eq.a.nrows()),
                    opts.kkt_tolerance,
                    iterations,
                ));
            }
            PhaseOneResult::Budget(x) => {
                return Ok(build_solution(
                    program,
                    &rows,
                    &eq,
                    SolveStatus::IterationLimit,
                    x,
                    DVector::zeros(eq.a.nrows()),
                    opts.kkt_tolerance,
                    iterations,
                ));
            }
        }
    };

    // Phase 2: follow the central path of the true objective.
    let core = BarrierCore {
        objective: program.objective.as_ref(),
        rows: &rows,
        eq: &eq,
        n,
    };
    let outcome = core.minimize(x_feasible, opts, &mut iterations, &|_| false)?;
    let mut solution = build_solution(
        program,
        &rows,
        &eq,
        SolveStatus::IterationLimit,
        outcome.x,
        outcome.nu,
        outcome.mu,
        iterations,
    );
    // Optimality is judged from the measured residuals at the final
    // iterate, not from how smoothly the path was followed: a stage may
    // stall at the edge of double precision with the answer already in
    // hand, or the budget may die with the path half walked.
    let tol = opts.kkt_tolerance;
    if solution.kkt.stationarity <= tol
        && solution.kkt.primal_feasibility <= tol
        && solution.kkt.complementarity <= tol
    {
        solution.status = SolveStatus::Optimal;
    }
    Ok(solution)
}

enum PhaseOneResult {
    Feasible(DVector<f64>),
    Infeasible(Vec<String>),
    Budget(DVector<f64>),
}

/// Minimizes the worst violation `s` over `(x, s)` with `G x - s <= h`,
/// stopping as soon as the iterate is strictly feasible by a margin.
fn phase_one(
    rows: &FoldedRows,
    eq: &EqualitySystem,
    program: &ConvexProgram,
    x0: DVector<f64>,
    feas_tol: f64,
    opts: &SolverOptions,
    iterations: &mut usize,
) -> Result<PhaseOneResult> {
    use crate::model::QuadraticObjective;
    let n = program.n_vars;
    let h_scale = rows.rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let s_floor = -2.0 * (1.0 + h_scale);

    // Extended rows over (x, s).
    let mut ext_coeffs: Vec<Vec<(usize, f64)>> = Vec::with_capacity(rows.len() + 1);
    let mut ext_rhs = Vec::with_capacity(rows.len() + 1);
    let mut ext_names = Vec::with_capacity(rows.len() + 1);
    for r in 0..rows.len() {
        let mut c = rows.coeffs[r].clone();
        c.push((n, -1.0));
        ext_coeffs.push(c);
        ext_rhs.push(rows.rhs[r]);
        ext_names.push(rows.names[r].clone());
    }
    ext_coeffs.push(vec![(n, -1.0)]);
    ext_rhs.push(-s_floor);
    ext_names.push("phase1-floor".into());
    let ext_rows = FoldedRows {
        coeffs: ext_coeffs,
        rhs: ext_rhs,
        names: ext_names,
    };
    let ext_eq = EqualitySystem {
        a: {
            let mut a = DMatrix::zeros(eq.a.nrows(), n + 1);
            a.view_mut((0, 0), (eq.a.nrows(), n)).copy_from(&eq.a);
            a
        },
        b: eq.b.clone(),
        names: eq.names.clone(),
    };
    let mut objective_c = DVector::zeros(n + 1);
    objective_c[n] = 1.0;
    let objective = QuadraticObjective::linear(objective_c);

    let mut y0 = DVector::zeros(n + 1);
    y0.rows_mut(0, n).copy_from(&x0);
    y0[n] = rows.worst_violation(&x0).max(s_floor * 0.5) + 1.0;

    let core = BarrierCore {
        objective: &objective,
        rows: &ext_rows,
        eq: &ext_eq,
        n: n + 1,
    };
    let margin = feas_tol;
    let strictly_feasible = |y: &DVector<f64>| -> bool {
        let x = y.rows(0, n).clone_owned();
        rows.worst_violation(&x) < -margin
    };
    let outcome = core.minimize(y0, opts, iterations, &strictly_feasible)?;
    let x = outcome.x.rows(0, n).clone_owned();
    if outcome.stopped_early {
        return Ok(PhaseOneResult::Feasible(x));
    }
    if !outcome.converged {
        return Ok(PhaseOneResult::Budget(x));
    }
    let s_star = outcome.x[n];
    if s_star <= -margin {
        return Ok(PhaseOneResult::Feasible(x));
    }
    // No strictly feasible point exists (or the region has no interior):
    // name the rows that are violated or pinned tight at the best point.
    let mut blocking: Vec<String> = (0..rows.len())
        .filter(|&r| rows.row_dot(r, &x) - rows.rhs[r] > feas_tol)
        .map(|r| rows.names[r].clone())
        .collect();
    if blocking.is_empty() {
        blocking = (0..rows.len())
            .filter(|&r| (rows.row_dot(r, &x) - rows.rhs[r]).abs() <= feas_tol)
            .map(|r| rows.names[r].clone())
            .collect();
    }
    Ok(PhaseOneResult::Infeasible(blocking))
}

#[allow(clippy::too_many_arguments)]
fn build_solution(
    program: &ConvexProgram,
    rows: &FoldedRows,
    eq: &EqualitySystem,
    status: SolveStatus,
    x: DVector<f64>,
    nu: DVector<f64>,
    mu: f64,
    newton_iterations: usize,
) -> Solution {
    let z: Vec<f64> = (0..rows.len())
        .map(|r| {
            let slack = rows.rhs[r] - rows.row_dot(r, &x);
            if slack > 0.0 {
                mu / slack
            } else {
                0.0
            }
        })
        .collect();
    let lambda: Vec<f64> = (0..eq.a.nrows()).map(|r| nu[r] * mu).collect();
    let kkt = kkt_residuals(program, &x, &z, &lambda);
    let objective = program.objective.value(&x);
    Solution {
        status,
        x,
        objective,
        newton_iterations,
        inequality_duals: rows.names.iter().cloned().zip(z).collect(),
        equality_duals: eq.names.iter().cloned().zip(lambda).collect(),
        kkt,
    }
}

/// First-order optimality residuals at `(x, z, lambda)`, with inequality
/// duals `z` in folded row order (explicit rows, then upper bounds, then
/// lower bounds) and `lambda` in equality order.
pub fn kkt_residuals(
    program: &ConvexProgram,
    x: &DVector<f64>,
    z: &[f64],
    lambda: &[f64],
) -> KktResiduals {
    let rows = FoldedRows::from_program(program);
    let eq = EqualitySystem::from_program(program);
    let mut grad = DVector::zeros(program.n_vars);
    program.objective.gradient(x, &mut grad);
    for r in 0..rows.len().min(z.len()) {
        for &(i, c) in &rows.coeffs[r] {
            grad[i] += z[r] * c;
        }
    }
    for r in 0..eq.a.nrows().min(lambda.len()) {
        for i in 0..program.n_vars {
            grad[i] += lambda[r] * eq.a[(r, i)];
        }
    }
    let mut primal: f64 = 0.0;
    let mut comp: f64 = 0.0;
    for r in 0..rows.len() {
        let viol = rows.row_dot(r, x) - rows.rhs[r];
        primal = primal.max(viol);
        if r < z.len() {
            comp = comp.max((z[r] * viol.min(0.0).abs()).abs());
        }
    }
    for r in 0..eq.a.nrows() {
        primal = primal.max(((&eq.a * x)[r] - eq.b[r]).abs());
    }
    KktResiduals {
        stationarity: grad.amax(),
        primal_feasibility: primal.max(0.0),
        complementarity: comp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinearRow, QuadraticObjective, RowSense};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quad(n: usize, q_diag: &[f64], c: &[f64]) -> Box<QuadraticObjective> {
        let mut q = DMatrix::zeros(n, n);
        for i in 0..n {
            q[(i, i)] = q_diag[i];
        }
        Box::new(QuadraticObjective {
            q,
            c: DVector::from_row_slice(c),
            d: 0.0,
        })
    }

    #[test]
    fn active_bound_with_known_dual() {
        // minimize x^2 subject to x >= 1: optimum x = 1, dual on the active
        // row 2 (stationarity 2 x - z = 0).
        let mut p = ConvexProgram::new(1, quad(1, &[2.0], &[0.0]));
        p.add_row(LinearRow::new("floor", vec![(0, 1.0)], RowSense::Ge, 1.0));
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-5);
        assert_relative_eq!(sol.objective, 1.0, epsilon = 1e-5);
        let dual = sol
            .inequality_duals
            .iter()
            .find(|(n, _)| n == "floor")
            .map(|&(_, z)| z)
            .unwrap();
        assert_relative_eq!(dual, 2.0, epsilon = 1e-3);
        assert!(sol.kkt.stationarity <= 1e-5);
        assert!(sol.kkt.primal_feasibility <= 1e-8);
        assert!(sol.kkt.complementarity <= 1e-6);
    }

    #[test]
    fn equality_and_box_interplay() {
        // minimize (x-3)^2 with 0 <= x <= 1: clipped at the box edge.
        let mut p = ConvexProgram::new(1, quad(1, &[2.0], &[-6.0]));
        p.set_bounds(0, 0.0, 1.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());
        assert_relative_eq!(sol.x[0], 1.0, epsilon = 1e-5);
    }

    #[test]
    fn contradictory_rows_are_reported_by_name() {
        let mut p = ConvexProgram::new(1, quad(1, &[2.0], &[0.0]));
        p.add_row(LinearRow::new("ceiling", vec![(0, 1.0)], RowSense::Le, 0.0));
        p.add_row(LinearRow::new("floor", vec![(0, 1.0)], RowSense::Ge, 1.0));
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        match sol.status {
            SolveStatus::Infeasible { ref violated_rows } => {
                assert!(
                    violated_rows.iter().any(|n| n == "ceiling")
                        || violated_rows.iter().any(|n| n == "floor"),
                    "expected a blocking row name, got {violated_rows:?}"
                );
            }
            ref s => panic!("expected infeasible, got {s:?}"),
        }
    }

    #[test]
    fn random_equality_qps_match_closed_form() {
        // With only equalities, the optimum solves one linear KKT system;
        // compare against an independent dense factorization.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for case in 0..25 {
            let n = rng.gen_range(2..7);
            let m = rng.gen_range(1..n);
            let mut q = DMatrix::zeros(n, n);
            for i in 0..n {
                q[(i, i)] = rng.gen_range(0.5..3.0);
            }
            let c = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
            let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0f64));
            let b = DVector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));

            let mut p = ConvexProgram::new(
                n,
                Box::new(QuadraticObjective {
                    q: q.clone(),
                    c: c.clone(),
                    d: 0.0,
                }),
            );
            for r in 0..m {
                let coeffs: Vec<(usize, f64)> = (0..n).map(|i| (i, a[(r, i)])).collect();
                p.add_row(LinearRow::new(format!("eq{r}"), coeffs, RowSense::Eq, b[r]));
            }
            let sol = solve(&p, &SolverOptions::default()).unwrap();
            assert!(sol.is_optimal(), "case {case} not optimal");

            let dim = n + m;
            let mut kkt = DMatrix::zeros(dim, dim);
            kkt.view_mut((0, 0), (n, n)).copy_from(&q);
            kkt.view_mut((0, n), (n, m)).copy_from(&a.transpose());
            kkt.view_mut((n, 0), (m, n)).copy_from(&a);
            let mut rhs = DVector::zeros(dim);
            rhs.rows_mut(0, n).copy_from(&(-&c));
            rhs.rows_mut(n, m).copy_from(&b);
            let want = kkt.lu().solve(&rhs).unwrap();
            for i in 0..n {
                assert_relative_eq!(sol.x[i], want[i], epsilon = 1e-6, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn inequality_qp_matches_grid_search() {
        // Two coupled variables with a shared budget row and boxes; the
        // oracle scans a fine grid of the one free variable after
        // eliminating the budget.
        let mut p = ConvexProgram::new(2, quad(2, &[2.0, 4.0], &[-1.0, -2.0]));
        p.add_row(LinearRow::new(
            "budget",
            vec![(0, 1.0), (1, 1.0)],
            RowSense::Le,
            1.5,
        ));
        p.set_bounds(0, 0.0, 2.0);
        p.set_bounds(1, 0.0, 2.0);
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());

        let f = |x0: f64, x1: f64| x0 * x0 + 2.0 * x1 * x1 - x0 - 2.0 * x1;
        let mut best = f64::INFINITY;
        let steps = 3000;
        for i in 0..=steps {
            for j in 0..=steps {
                let x0 = 2.0 * i as f64 / steps as f64;
                let x1 = 2.0 * j as f64 / steps as f64;
                if x0 + x1 <= 1.5 {
                    best = best.min(f(x0, x1));
                }
            }
        }
        assert!(sol.objective <= best + 1e-4);
        assert!(sol.objective >= best - 1e-4);
    }

    #[test]
    fn row_order_does_not_change_the_solution() {
        let build = |order: &[usize]| {
            let mut p = ConvexProgram::new(2, quad(2, &[2.0, 2.0], &[-4.0, -6.0]));
            let rows = [
                LinearRow::new("sum", vec![(0, 1.0), (1, 1.0)], RowSense::Le, 2.0),
                LinearRow::new("gap", vec![(0, 1.0), (1, -1.0)], RowSense::Le, 0.5),
                LinearRow::new("x0", vec![(0, 1.0)], RowSense::Ge, 0.0),
                LinearRow::new("x1", vec![(1, 1.0)], RowSense::Ge, 0.0),
            ];
            for &i in order {
                p.add_row(rows[i].clone());
            }
            solve(&p, &SolverOptions::default()).unwrap()
        };
        let a = build(&[0, 1, 2, 3]);
        let b = build(&[3, 1, 0, 2]);
        assert!(a.is_optimal() && b.is_optimal());
        for i in 0..2 {
            assert_relative_eq!(a.x[i], b.x[i], epsilon = 1e-8);
        }
    }

    #[test]
    fn repeated_solves_are_bitwise_identical() {
        let mut p = ConvexProgram::new(2, quad(2, &[2.0, 4.0], &[-1.0, -2.0]));
        p.add_row(LinearRow::new(
            "budget",
            vec![(0, 1.0), (1, 1.0)],
            RowSense::Le,
            1.5,
        ));
        p.set_bounds(0, 0.0, 2.0);
        p.set_bounds(1, 0.0, 2.0);
        let a = solve(&p, &SolverOptions::default()).unwrap();
        let b = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(a.x.as_slice(), b.x.as_slice());
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        assert_eq!(a.newton_iterations, b.newton_iterations);
    }

    #[test]
    fn unbounded_problem_hits_the_iteration_limit() {
        // minimize x with only a ceiling: no finite optimum.
        let mut p = ConvexProgram::new(1, quad(1, &[0.0], &[1.0]));
        p.add_row(LinearRow::new("ceiling", vec![(0, 1.0)], RowSense::Le, 5.0));
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::IterationLimit);
    }

    #[test]
    fn solution_beats_random_feasible_points() {
        let mut p = ConvexProgram::new(3, quad(3, &[2.0, 3.0, 1.0], &[1.0, -2.0, 0.5]));
        p.add_row(LinearRow::new(
            "mix",
            vec![(0, 1.0), (1, 2.0), (2, -1.0)],
            RowSense::Le,
            2.0,
        ));
        for i in 0..3 {
            p.set_bounds(i, -1.0, 1.0);
        }
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());
        let f = |x: &DVector<f64>| {
            x[0] * x[0] + 1.5 * x[1] * x[1] + 0.5 * x[2] * x[2] + x[0] - 2.0 * x[1] + 0.5 * x[2]
        };
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..2000 {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-1.0..1.0));
            if x[0] + 2.0 * x[1] - x[2] <= 2.0 {
                assert!(sol.objective <= f(&x) + 1e-6);
            }
        }
    }

    #[test]
    fn bad_options_are_rejected() {
        let p = ConvexProgram::new(1, quad(1, &[2.0], &[0.0]));
        let mut o = SolverOptions::default();
        o.barrier_reduction = 1.5;
        assert!(solve(&p, &o).is_err());
    }

    #[test]
    fn dispatch_fixture_solves_to_feasible_optimum() {
        use crate::model::assemble;
        use crate::testutil::small_problem;
        let problem = small_problem();
        let model = assemble(&problem).unwrap();
        let sol = solve(&model.program, &SolverOptions::default()).unwrap();
        assert!(sol.is_optimal());
        assert!(sol.kkt.stationarity <= 1e-5);
        assert!(sol.kkt.primal_feasibility <= 1e-8);
        assert!(model.program.max_violation(&sol.x) <= 1e-8);

        let sched = model.layout.schedule_from(&sol.x);
        // Balance holds period by period.
        for t in 0..problem.periods() {
            let supply: f64 = sched.non_agc[t].iter().sum::<f64>()
                + sched.agc[t].iter().sum::<f64>()
                + sched.wind[t].iter().sum::<f64>();
            let demand: f64 = problem.loads[t].iter().sum();
            assert_relative_eq!(supply, demand, epsilon = 1e-7);
            assert_relative_eq!(
                sched.total_wind[t],
                sched.wind[t].iter().sum::<f64>(),
                epsilon = 1e-7
            );
        }
        // With wind far cheaper than thermal energy, the entering ramp
        // limits of both AGC units bind from above.
        let dt = problem.horizon.period_minutes;
        for (j, u) in problem.agc.iter().enumerate() {
            let floor = problem.horizon.initial_agc[j] - u.ramp_down * dt;
            assert!(sched.agc[0][j] >= floor - 1e-7);
        }
    }

    #[test]
    fn infeasible_dispatch_names_the_blocking_family() {
        use crate::model::assemble;
        use crate::testutil::small_problem;
        let mut problem = small_problem();
        // Blow up the spread so the probabilistic ramp bands become empty.
        let wide = crate::cauchy::MultivariateCauchy::new(
            problem.forecasts[0].distribution.location().clone(),
            problem.forecasts[0].distribution.scale() * 16.0,
        )
        .unwrap();
        problem.forecasts[0].distribution = wide;
        let model = assemble(&problem).unwrap();
        let sol = solve(&model.program, &SolverOptions::default()).unwrap();
        match sol.status {
            SolveStatus::Infeasible { ref violated_rows } => {
                assert!(
                    violated_rows.iter().any(|n| n.starts_with("agc-ramp")),
                    "expected ramp rows among {violated_rows:?}"
                );
            }
            ref s => panic!("expected infeasible, got {s:?}"),
        }
    }
}
