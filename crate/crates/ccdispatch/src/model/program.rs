//! Generic smooth convex program container handed to the solver: a twice
//! differentiable objective, linear equality and inequality rows, and box
//! bounds. Rows keep human-readable names so infeasibility certificates and
//! model dumps can point back at their origin.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Row comparison sense as written by a builder. Internally `Ge` rows are
/// normalized to `Le` by negation when added to a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Eq,
    Le,
    Ge,
}

/// One linear row `sum(coeffs) (=, <=, >=) rhs` over the decision vector.
#[derive(Debug, Clone)]
pub struct LinearRow {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub sense: RowSense,
}

impl LinearRow {
    pub fn new(name: impl Into<String>, coeffs: Vec<(usize, f64)>, sense: RowSense, rhs: f64) -> Self {
        Self {
            name: name.into(),
            coeffs,
            rhs,
            sense,
        }
    }

    /// Evaluates the left-hand side at `x`.
    pub fn lhs(&self, x: &DVector<f64>) -> f64 {
        self.coeffs.iter().map(|&(i, c)| c * x[i]).sum()
    }
}

/// Twice differentiable objective. `gradient` and `hessian` overwrite their
/// output arguments completely.
pub trait Objective: Send + Sync {
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>, out: &mut DVector<f64>);
    fn hessian(&self, x: &DVector<f64>, out: &mut DMatrix<f64>);
}

/// Dense quadratic `1/2 x^T Q x + c^T x + d`; the workhorse for tests and
/// for phase-1 style linear objectives (zero `Q`).
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub q: DMatrix<f64>,
    pub c: DVector<f64>,
    pub d: f64,
}

impl QuadraticObjective {
    pub fn linear(c: DVector<f64>) -> Self {
        let n = c.len();
        Self {
            q: DMatrix::zeros(n, n),
            c,
            d: 0.0,
        }
    }
}

impl Objective for QuadraticObjective {
    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * (x.transpose() * &self.q * x)[(0, 0)] + self.c.dot(x) + self.d
    }

    fn gradient(&self, x: &DVector<f64>, out: &mut DVector<f64>) {
        out.copy_from(&(&self.q * x + &self.c));
    }

    fn hessian(&self, _x: &DVector<f64>, out: &mut DMatrix<f64>) {
        out.copy_from(&self.q);
    }
}

/// Smooth convex program over `n_vars` variables.
pub struct ConvexProgram {
    pub n_vars: usize,
    pub var_names: Vec<String>,
    pub objective: Box<dyn Objective>,
    pub equalities: Vec<LinearRow>,
    /// All inequality rows, normalized to `lhs <= rhs`.
    pub inequalities: Vec<LinearRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ConvexProgram {
    pub fn new(n_vars: usize, objective: Box<dyn Objective>) -> Self {
        Self {
            n_vars,
            var_names: (0..n_vars).map(|i| format!("x{i}")).collect(),
            objective,
            equalities: Vec::new(),
            inequalities: Vec::new(),
            lower: vec![f64::NEG_INFINITY; n_vars],
            upper: vec![f64::INFINITY; n_vars],
        }
    }

    /// Adds a row, normalizing `Ge` to `Le` by negating both sides.
    pub fn add_row(&mut self, row: LinearRow) {
        match row.sense {
            RowSense::Eq => self.equalities.push(row),
            RowSense::Le => self.inequalities.push(row),
            RowSense::Ge => {
                let LinearRow {
                    name, coeffs, rhs, ..
                } = row;
                self.inequalities.push(LinearRow {
                    name,
                    coeffs: coeffs.into_iter().map(|(i, c)| (i, -c)).collect(),
                    rhs: -rhs,
                    sense: RowSense::Le,
                });
            }
        }
    }

    pub fn add_rows(&mut self, rows: Vec<LinearRow>) {
        for r in rows {
            self.add_row(r);
        }
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Structural audit: indices in range, finite coefficients, ordered
    /// bounds. Run after assembly, before solving.
    pub fn audit(&self) -> Result<()> {
        for row in self.equalities.iter().chain(self.inequalities.iter()) {
            for &(i, c) in &row.coeffs {
                if i >= self.n_vars {
                    return Err(Error::InvalidProblem(format!(
                        "row '{}' references variable {i} out of {}",
                        row.name, self.n_vars
                    )));
                }
                if !c.is_finite() {
                    return Err(Error::InvalidProblem(format!(
                        "row '{}' has non-finite coefficient on variable {i}",
                        row.name
                    )));
                }
            }
            if !row.rhs.is_finite() {
                return Err(Error::InvalidProblem(format!(
                    "row '{}' has non-finite right-hand side",
                    row.name
                )));
            }
        }
        for i in 0..self.n_vars {
            if self.lower[i] > self.upper[i] {
                return Err(Error::InvalidProblem(format!(
                    "variable {} has empty bound interval [{}, {}]",
                    self.var_names[i], self.lower[i], self.upper[i]
                )));
            }
        }
        Ok(())
    }

    /// Human-readable dump of variables, bounds, and rows.
    pub fn describe(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "variables: {}  equalities: {}  inequalities: {}",
            self.n_vars,
            self.equalities.len(),
            self.inequalities.len()
        );
        for i in 0..self.n_vars {
            let _ = writeln!(
                s,
                "  var {:<24} in [{:.6}, {:.6}]",
                self.var_names[i], self.lower[i], self.upper[i]
            );
        }
        let fmt_row = |row: &LinearRow, op: &str| {
            let terms: Vec<String> = row
                .coeffs
                .iter()
                .map(|&(i, c)| format!("{c:+.6}*{}", self.var_names[i]))
                .collect();
            format!("  {:<40} {} {} {:.6}", row.name, terms.join(" "), op, row.rhs)
        };
        for row in &self.equalities {
            let _ = writeln!(s, "{}", fmt_row(row, "="));
        }
        for row in &self.inequalities {
            let _ = writeln!(s, "{}", fmt_row(row, "<="));
        }
        s
    }

    /// Worst violation of all rows and bounds at `x` (0 when feasible).
    pub fn max_violation(&self, x: &DVector<f64>) -> f64 {
        let mut v: f64 = 0.0;
        for row in &self.equalities {
            v = v.max((row.lhs(x) - row.rhs).abs());
        }
        for row in &self.inequalities {
            v = v.max(row.lhs(x) - row.rhs);
        }
        for i in 0..self.n_vars {
            v = v.max(self.lower[i] - x[i]).max(x[i] - self.upper[i]);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ge_rows_normalize_to_le() {
        let mut p = ConvexProgram::new(
            2,
            Box::new(QuadraticObjective::linear(DVector::zeros(2))),
        );
        p.add_row(LinearRow::new(
            "r",
            vec![(0, 2.0), (1, -1.0)],
            RowSense::Ge,
            3.0,
        ));
        assert_eq!(p.inequalities.len(), 1);
        let row = &p.inequalities[0];
        assert_eq!(row.coeffs, vec![(0, -2.0), (1, 1.0)]);
        assert_relative_eq!(row.rhs, -3.0);
        assert_eq!(row.sense, RowSense::Le);
    }

    #[test]
    fn audit_catches_bad_indices_and_bounds() {
        let mut p = ConvexProgram::new(
            1,
            Box::new(QuadraticObjective::linear(DVector::zeros(1))),
        );
        p.add_row(LinearRow::new("bad", vec![(3, 1.0)], RowSense::Le, 0.0));
        assert!(p.audit().is_err());

        let mut p2 = ConvexProgram::new(
            1,
            Box::new(QuadraticObjective::linear(DVector::zeros(1))),
        );
        p2.set_bounds(0, 1.0, -1.0);
        assert!(p2.audit().is_err());
    }

    #[test]
    fn quadratic_objective_derivatives_are_consistent() {
        let q = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 4.0]);
        let obj = QuadraticObjective {
            q,
            c: DVector::from_vec(vec![1.0, -2.0]),
            d: 3.0,
        };
        let x = DVector::from_vec(vec![0.7, -1.2]);
        let mut g = DVector::zeros(2);
        obj.gradient(&x, &mut g);
        let h = 1e-6;
        for i in 0..2 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (obj.value(&xp) - obj.value(&xm)) / (2.0 * h);
            assert_relative_eq!(g[i], fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn max_violation_reports_worst_row() {
        let mut p = ConvexProgram::new(
            1,
            Box::new(QuadraticObjective::linear(DVector::zeros(1))),
        );
        p.add_row(LinearRow::new("cap", vec![(0, 1.0)], RowSense::Le, 1.0));
        p.set_bounds(0, 0.0, 5.0);
        let x = DVector::from_vec(vec![3.0]);
        assert_relative_eq!(p.max_violation(&x), 2.0);
    }
}
