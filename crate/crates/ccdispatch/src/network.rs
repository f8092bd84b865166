//! DC power-flow network model and power transfer distribution factors.
//!
//! Under the DC approximation, line flows are linear in nodal injections:
//! `flow = G * p` where `G` is the PTDF matrix. `G` is built from the line
//! susceptance incidence matrix and the reduced nodal susceptance matrix
//! with the slack bus removed; the slack column of `G` is zero by
//! convention. Generation counts as positive injection, load as negative.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Transmission line between two buses. `reactance` is in per unit;
/// `limit` is the thermal bound in MW (per period when a profile is given,
/// `f64::INFINITY` for unmonitored lines).
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    pub reactance: f64,
    pub limit: LineLimit,
}

/// Thermal limit of a line: one value for the whole horizon or one per
/// period.
#[derive(Debug, Clone, PartialEq)]
pub enum LineLimit {
    Scalar(f64),
    PerPeriod(Vec<f64>),
}

impl LineLimit {
    /// Limit applying in period `t` (0-based).
    pub fn at(&self, t: usize) -> f64 {
        match self {
            LineLimit::Scalar(v) => *v,
            LineLimit::PerPeriod(v) => v[t],
        }
    }

    pub fn unlimited() -> Self {
        LineLimit::Scalar(f64::INFINITY)
    }
}

/// Static grid description: bus count, lines, and the slack bus.
#[derive(Debug, Clone)]
pub struct GridModel {
    bus_count: usize,
    lines: Vec<Line>,
    slack_bus: usize,
}

impl GridModel {
    /// Validates indices, reactances, and connectivity.
    pub fn new(bus_count: usize, lines: Vec<Line>, slack_bus: usize) -> Result<Self> {
        if bus_count == 0 {
            return Err(Error::InvalidProblem("grid needs at least one bus".into()));
        }
        if slack_bus >= bus_count {
            return Err(Error::InvalidProblem(format!(
                "slack bus {slack_bus} out of range for {bus_count} buses"
            )));
        }
        for (i, l) in lines.iter().enumerate() {
            if l.from >= bus_count || l.to >= bus_count {
                return Err(Error::InvalidProblem(format!(
                    "line {i} endpoints ({}, {}) out of range",
                    l.from, l.to
                )));
            }
            if l.from == l.to {
                return Err(Error::InvalidProblem(format!("line {i} is a self-loop")));
            }
            if !(l.reactance > 0.0) || !l.reactance.is_finite() {
                return Err(Error::InvalidProblem(format!(
                    "line {i} reactance must be finite and > 0, got {}",
                    l.reactance
                )));
            }
        }
        let grid = Self {
            bus_count,
            lines,
            slack_bus,
        };
        grid.check_connected()?;
        Ok(grid)
    }

    pub fn bus_count(&self) -> usize {
        self.bus_count
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn slack_bus(&self) -> usize {
        self.slack_bus
    }

    fn check_connected(&self) -> Result<()> {
        let mut reached = vec![false; self.bus_count];
        let mut stack = vec![self.slack_bus];
        reached[self.slack_bus] = true;
        while let Some(b) = stack.pop() {
            for l in &self.lines {
                let other = if l.from == b {
                    l.to
                } else if l.to == b {
                    l.from
                } else {
                    continue;
                };
                if !reached[other] {
                    reached[other] = true;
                    stack.push(other);
                }
            }
        }
        match reached.iter().position(|r| !r) {
            Some(bus) => Err(Error::Islanded(bus)),
            None => Ok(()),
        }
    }

    /// Nodal susceptance matrix `B` (bus_count x bus_count).
    fn bus_susceptance(&self) -> DMatrix<f64> {
        let n = self.bus_count;
        let mut b = DMatrix::zeros(n, n);
        for l in &self.lines {
            let y = 1.0 / l.reactance;
            b[(l.from, l.from)] += y;
            b[(l.to, l.to)] += y;
            b[(l.from, l.to)] -= y;
            b[(l.to, l.from)] -= y;
        }
        b
    }
}

/// PTDF matrix `G` (lines x buses): sensitivities of line flows to nodal
/// injections with the slack bus absorbing the balance. The slack column
/// is identically zero.
#[derive(Debug, Clone)]
pub struct PtdfMatrix {
    matrix: DMatrix<f64>,
    slack_bus: usize,
}

impl PtdfMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn slack_bus(&self) -> usize {
        self.slack_bus
    }

    pub fn line_count(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn bus_count(&self) -> usize {
        self.matrix.ncols()
    }

    /// Sensitivity of line `l`'s flow to an injection at `bus`.
    pub fn factor(&self, l: usize, bus: usize) -> f64 {
        self.matrix[(l, bus)]
    }
}

/// Builds the PTDF matrix for a connected grid by inverting the slack-reduced
/// nodal susceptance matrix.
pub fn build_ptdf(grid: &GridModel) -> Result<PtdfMatrix> {
    let n = grid.bus_count();
    let slack = grid.slack_bus();
    let b = grid.bus_susceptance();

    // Reduced susceptance without the slack row/column.
    let keep: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let m = n - 1;
    let mut b_red = DMatrix::zeros(m, m);
    for (ri, &i) in keep.iter().enumerate() {
        for (rj, &j) in keep.iter().enumerate() {
            b_red[(ri, rj)] = b[(i, j)];
        }
    }
    let inv = b_red
        .try_inverse()
        .ok_or_else(|| Error::Singular("reduced susceptance matrix".into()))?;

    let lines = grid.lines();
    let mut g = DMatrix::zeros(lines.len(), n);
    for (li, l) in lines.iter().enumerate() {
        let y = 1.0 / l.reactance;
        // Row of the line susceptance matrix restricted to non-slack buses,
        // multiplied into the reduced inverse.
        for (rj, &j) in keep.iter().enumerate() {
            let mut v = 0.0;
            if l.from != slack {
                let rf = keep.iter().position(|&x| x == l.from).unwrap();
                v += y * inv[(rf, rj)];
            }
            if l.to != slack {
                let rt = keep.iter().position(|&x| x == l.to).unwrap();
                v -= y * inv[(rt, rj)];
            }
            g[(li, j)] = v;
        }
    }
    Ok(PtdfMatrix {
        matrix: g,
        slack_bus: slack,
    })
}

/// Line flows for a balanced injection vector (MW, one entry per bus;
/// positive = generation). Injections must sum to zero within 1e-6 MW.
pub fn line_flows(ptdf: &PtdfMatrix, injections: &DVector<f64>) -> Result<DVector<f64>> {
    if injections.len() != ptdf.bus_count() {
        return Err(Error::DimensionMismatch {
            what: "injection vector",
            expected: ptdf.bus_count(),
            actual: injections.len(),
        });
    }
    let net: f64 = injections.iter().sum();
    if net.abs() > 1e-6 {
        return Err(Error::Unbalanced(net));
    }
    Ok(ptdf.matrix() * injections)
}
