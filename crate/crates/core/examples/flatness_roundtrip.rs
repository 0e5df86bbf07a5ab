//! Impose the flatness flux reference on the plant and compare the landing
//! with the plain 24 V closing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use softland::operation::{run_operation, ControlMode, ControlStack, Timing};
use softland::plant::SimConfig;
use softland::r2r::CostConfig;
use softland::relay::RelayParams;
use softland::trajectory::Direction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = RelayParams::default();
    let stroke = p.geometry.theta_max;
    for mode in [ControlMode::Standard, ControlMode::IdealTracking] {
        let stack = ControlStack::new(mode, Direction::Making, &p, p.param_vector(), p.resistance, Timing::default())?;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rec = run_operation(&stack, &p, &SimConfig::default(), &CostConfig::default(), 1, &mut rng)?;
        let worst = rec
            .samples
            .iter()
            .filter(|s| s.t <= stack.timing.tf)
            .map(|s| (s.theta - stack.trajectory.eval(s.t).pos).abs())
            .fold(0.0, f64::max);
        println!(
            "{mode:?}: landing speed {:.4} rad/s, max tracking error {:.2e} of stroke, {} clamped samples",
            rec.landing_speed().unwrap_or(0.0),
            worst / stroke,
            rec.clamped_samples
        );
    }
    Ok(())
}
