//! Look-ahead dispatch model: problem data, the smooth convex objective
//! with its closed-form regulation cost, and the exact lowering of every
//! probabilistic requirement to a deterministic linear row.

mod assemble;
mod objective;
mod program;
mod rows;
mod types;

pub use assemble::{assemble, assemble_with, AssembleOptions, AssembledModel};
pub use objective::{
    generation_cost, scheduled_cost, CorrectiveCostTerm, CostBreakdown, DispatchObjective,
};
pub use program::{ConvexProgram, LinearRow, Objective, QuadraticObjective, RowSense};
pub use rows::{
    agc_capacity_rows, agc_ramp_rows, balance_rows, convert_chance_row, non_agc_ramp_rows,
    reserve_rows, transmission_rows, wind_linking_rows, CompactChanceConstraint,
    ProbabilisticSense,
};
pub use types::{
    AgcUnit, DispatchProblem, DispatchSchedule, HorizonConfig, NonAgcUnit, RiskLevels,
    VariableLayout, WindFarm, WindForecastPeriod,
};
