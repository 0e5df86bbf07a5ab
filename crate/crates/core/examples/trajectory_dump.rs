//! Sample the making and breaking references and print them as CSV.
//!
//! cargo run --example trajectory_dump > reference.csv

use std::io::{self, Write};

use softland::operation::Timing;
use softland::relay::RelayParams;
use softland::trajectory::{make_reference, BoundarySpec, Direction};

fn main() -> softland::Result<()> {
    let geo = RelayParams::default().geometry;
    let t = Timing::default();
    let mut out = io::stdout().lock();
    for dir in [Direction::Making, Direction::Breaking] {
        let traj = make_reference(BoundarySpec::new(dir, &geo, t.t0, t.tc, t.tf)?)?;
        writeln!(out, "# {dir:?}")?;
        traj.write_csv(&mut out, t.t0, t.tf, 1e-4)?;
    }
    Ok(())
}
