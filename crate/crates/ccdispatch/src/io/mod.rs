//! File formats and the drivers behind the command-line interface.
//!
//! Systems are described in JSON (see [`system`] for the schema and unit
//! conventions), schedules and reports travel as CSV, and [`run`] holds
//! one driver per subcommand plus the rolling-horizon loop.

mod report;
mod run;
mod schedule;
mod system;

pub use report::{render_report, report_passes, write_report_csv};
pub use run::{
    exit_code, run_dispatch, run_fit, run_ptdf, run_rolling, run_validate, slice_problem,
    DispatchFlags, DispatchOutcome, FitOutcome, RollingOutcome, ValidateOutcome,
};
pub use schedule::{read_schedule_csv, write_schedule_csv};
pub use system::{load_system, parse_system};
