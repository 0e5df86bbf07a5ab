//! One closing per control mode on the nominal relay. Per-sample traces,
//! audio and a JSON summary of each are written to `target/examples-out`.

use std::fs::{self, File};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use softland::export::{write_audio_csv, write_samples_csv, write_summary_json};
use softland::operation::{run_operation, ControlMode, ControlStack, Timing};
use softland::plant::SimConfig;
use softland::r2r::CostConfig;
use softland::relay::RelayParams;
use softland::trajectory::Direction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new("target/examples-out");
    fs::create_dir_all(dir)?;
    let p = RelayParams::default();
    let modes = [ControlMode::Standard, ControlMode::FluxTracking, ControlMode::VoltageFeedforward];
    for mode in modes {
        let stack = ControlStack::new(mode, Direction::Making, &p, p.param_vector(), p.resistance, Timing::default())?;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rec = run_operation(&stack, &p, &SimConfig::default(), &CostConfig::default(), 1, &mut rng)?;
        let name = format!("{mode:?}").to_lowercase();
        write_samples_csv(&rec, File::create(dir.join(format!("{name}_samples.csv")))?)?;
        write_audio_csv(&rec.audio, File::create(dir.join(format!("{name}_audio.csv")))?)?;
        write_summary_json(&rec, File::create(dir.join(format!("{name}_summary.json")))?)?;
        println!(
            "{mode:?}: cost {:.3e}, landing {:.3} rad/s, {} stop impacts, {} saturated periods",
            rec.cost,
            rec.landing_speed().unwrap_or(0.0),
            rec.events.iter().filter(|e| e.kind.is_armature_stop()).count(),
            rec.saturated_samples
        );
    }
    println!("traces in {}", dir.display());
    Ok(())
}
