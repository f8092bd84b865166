//! Compute injection-to-flow sensitivities for the six-bus grid.
//!
//! Line-flow chance constraints need the linear map from bus injections to
//! line flows. This example builds the factor matrix for the bundled grid,
//! prints it, and spot-checks it against a direct DC power-flow solve for
//! one injection pattern.
//!
//! ```bash
//! cargo run --example ptdf_matrix
//! ```

use std::path::Path;

use nalgebra::DVector;

use ccdispatch::io::load_system;
use ccdispatch::network::{build_ptdf, line_flows};
use ccdispatch::Result;

fn main() -> Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/six_bus.json");
    let problem = load_system(&path)?;
    let grid = &problem.grid;
    let ptdf = build_ptdf(grid)?;

    let buses = grid.bus_count();
    println!("sensitivity of each line flow to 1 MW injected per bus");
    print!("{:>8}", "line");
    for b in 0..buses {
        print!("{:>9}", format!("bus{b}"));
    }
    println!();
    for (l, line) in grid.lines().iter().enumerate() {
        print!("{:>8}", format!("{}-{}", line.from, line.to));
        for b in 0..buses {
            print!("{:>9.4}", ptdf.factor(l, b));
        }
        println!();
    }
    println!(
        "(slack bus {} column is zero: its injection balances the rest)",
        grid.slack_bus()
    );

    // Cross-check against physics: for a balanced injection pattern, the
    // net flow out of every bus must equal the power injected there.
    let mut injections = DVector::zeros(buses);
    injections[1] = 60.0;
    injections[3] = -35.0;
    injections[4] = -25.0;
    let flows = line_flows(&ptdf, &injections)?;
    println!("\nflows for 60 MW in at bus 1, 35 MW out at bus 3, 25 MW out at bus 4:");
    for (l, line) in grid.lines().iter().enumerate() {
        println!("  {:>4}: {:>9.4} MW", format!("{}-{}", line.from, line.to), flows[l]);
    }
    let mut worst: f64 = 0.0;
    for b in 0..buses {
        let mut net_out = 0.0;
        for (l, line) in grid.lines().iter().enumerate() {
            if line.from == b {
                net_out += flows[l];
            }
            if line.to == b {
                net_out -= flows[l];
            }
        }
        worst = worst.max((net_out - injections[b]).abs());
    }
    println!("worst nodal imbalance across buses: {worst:.2e} MW");
    Ok(())
}
