//! Mechanical energy bookkeeping of the simulator for each mode and
//! direction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use softland::operation::{run_operation, ControlMode, ControlStack, Timing};
use softland::plant::SimConfig;
use softland::r2r::CostConfig;
use softland::relay::RelayParams;
use softland::trajectory::Direction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = RelayParams::default();
    for dir in [Direction::Making, Direction::Breaking] {
        for mode in [ControlMode::Standard, ControlMode::FluxTracking, ControlMode::VoltageFeedforward] {
            let stack = ControlStack::new(mode, dir, &p, p.param_vector(), p.resistance, Timing::default())?;
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let e = run_operation(&stack, &p, &SimConfig::default(), &CostConfig::default(), 1, &mut rng)?.energy;
            println!(
                "{dir:?}/{mode:?}: ΔE {:+.3e} J, magnetic work {:+.3e}, damping {:.3e}, impacts {:.3e}, residual {:.1e} relative",
                e.last - e.initial,
                e.magnetic_work,
                e.damping_loss,
                e.impact_loss,
                e.relative_residual()
            );
        }
    }
    Ok(())
}
