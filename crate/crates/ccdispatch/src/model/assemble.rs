//! Puts the pieces together: variable layout, objective, bounds, and every
//! constraint family, yielding a convex program ready for the solver.

use crate::error::Result;
use crate::model::objective::DispatchObjective;
use crate::model::program::ConvexProgram;
use crate::model::rows;
use crate::model::types::{DispatchProblem, VariableLayout};
use crate::network::{build_ptdf, PtdfMatrix};

/// Model variants. Defaults build the full formulation; the flags exist to
/// quantify what each refinement buys.
#[derive(Debug, Clone, Copy)]
pub struct AssembleOptions {
    /// Include the AGC response in each line's wind exposure. When false,
    /// line rows see raw farm sensitivities only.
    pub affine_line_recourse: bool,
    /// Protect AGC ramps probabilistically across periods. When false, only
    /// the scheduled ramp is limited.
    pub stochastic_agc_ramps: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            affine_line_recourse: true,
            stochastic_agc_ramps: true,
        }
    }
}

/// A dispatch problem lowered to solver form, keeping the index map and the
/// shift factors used to build it.
pub struct AssembledModel {
    pub program: ConvexProgram,
    pub layout: VariableLayout,
    pub ptdf: PtdfMatrix,
}

/// Builds the full formulation.
pub fn assemble(problem: &DispatchProblem) -> Result<AssembledModel> {
    assemble_with(problem, AssembleOptions::default())
}

/// Builds the program for a validated problem under the given options.
pub fn assemble_with(problem: &DispatchProblem, opts: AssembleOptions) -> Result<AssembledModel> {
    problem.validate()?;
    let layout = VariableLayout::for_problem(problem);
    let objective = DispatchObjective::new(problem, &layout)?;
    let mut program = ConvexProgram::new(layout.n_vars(), Box::new(objective));
    program.var_names = layout.names(problem);

    for t in 0..layout.periods {
        for (i, u) in problem.non_agc.iter().enumerate() {
            program.set_bounds(layout.non_agc(i, t), u.p_min, u.p_max);
        }
        // AGC outputs are constrained through their probabilistic capacity
        // rows rather than bounds on the schedule alone.
        for (k, &cap) in problem.forecasts[t].caps.iter().enumerate() {
            program.set_bounds(layout.wind(k, t), 0.0, cap);
        }
        program.set_bounds(layout.total_wind(t), 0.0, problem.forecasts[t].w_bar);
    }

    program.add_rows(rows::balance_rows(problem, &layout));
    program.add_rows(rows::wind_linking_rows(problem, &layout));
    program.add_rows(rows::non_agc_ramp_rows(problem, &layout));
    program.add_rows(rows::agc_capacity_rows(problem, &layout)?);
    program.add_rows(rows::agc_ramp_rows(
        problem,
        &layout,
        opts.stochastic_agc_ramps,
    )?);
    program.add_rows(rows::reserve_rows(problem, &layout)?);
    let ptdf = build_ptdf(&problem.grid)?;
    program.add_rows(rows::transmission_rows(
        problem,
        &layout,
        &ptdf,
        opts.affine_line_recourse,
    )?);

    program.audit()?;
    Ok(AssembledModel {
        program,
        layout,
        ptdf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::small_problem;

    #[test]
    fn assembled_program_has_expected_shape() {
        let p = small_problem();
        let model = assemble(&p).unwrap();
        let t = p.periods();
        // Per period: one non-AGC, two AGC, two farms, one total.
        assert_eq!(model.program.n_vars, t * 6);
        // Equalities: balance + wind linking per period.
        assert_eq!(model.program.equalities.len(), 2 * t);
        // Inequalities: non-AGC ramps absent (infinite rates), AGC capacity
        // 2 units x 2 sides x T, AGC ramps 2 units x 2 sides x T, reserve
        // 2 x T, lines 3 x 2 sides x T.
        let expected = 4 * t + 4 * t + 2 * t + 6 * t;
        assert_eq!(model.program.inequalities.len(), expected);
        assert!(model.program.audit().is_ok());
    }

    #[test]
    fn variable_names_appear_in_description() {
        let p = small_problem();
        let model = assemble(&p).unwrap();
        let text = model.program.describe();
        assert!(text.contains("p[A1]@t1"));
        assert!(text.contains("w@t2"));
        assert!(text.contains("balance@t1"));
        assert!(text.contains("line-hi[0-1]@t2"));
    }

    #[test]
    fn options_change_only_their_row_family() {
        let p = small_problem();
        let full = assemble(&p).unwrap();
        let no_ramp_margin = assemble_with(
            &p,
            AssembleOptions {
                stochastic_agc_ramps: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            full.program.inequalities.len(),
            no_ramp_margin.program.inequalities.len()
        );
        // Same rows, different right-hand sides on the cross-period ramps.
        let changed: Vec<&str> = full
            .program
            .inequalities
            .iter()
            .zip(&no_ramp_margin.program.inequalities)
            .filter(|(a, b)| (a.rhs - b.rhs).abs() > 1e-12)
            .map(|(a, _)| a.name.as_str())
            .collect();
        assert!(!changed.is_empty());
        assert!(changed.iter().all(|n| n.starts_with("agc-ramp")));
        assert!(changed.iter().all(|n| !n.ends_with("@t1")));
    }

    #[test]
    fn wind_bounds_follow_caps_and_total_bound() {
        let p = small_problem();
        let model = assemble(&p).unwrap();
        let l = &model.layout;
        for t in 0..p.periods() {
            for k in 0..l.n_wind {
                assert_eq!(model.program.lower[l.wind(k, t)], 0.0);
                assert_eq!(model.program.upper[l.wind(k, t)], p.forecasts[t].caps[k]);
            }
            assert_eq!(model.program.upper[l.total_wind(t)], p.forecasts[t].w_bar);
        }
    }

    #[test]
    fn invalid_problems_are_rejected_before_building() {
        let mut p = small_problem();
        p.agc[0].alpha = 0.9; // factors no longer sum to one
        assert!(assemble(&p).is_err());
    }
}
