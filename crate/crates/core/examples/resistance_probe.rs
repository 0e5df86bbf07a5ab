//! Coil resistance from a 1 V probe, before and after adding 150 Ω in series.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use softland::campaign::{median, percentiles};
use softland::plant::{probe_resistance, SimConfig};
use softland::relay::RelayParams;

fn main() -> softland::Result<()> {
    let cfg = SimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for extra in [0.0, 150.0] {
        let mut p = RelayParams::default();
        p.resistance += extra;
        let draws = (0..500).map(|_| probe_resistance(&p, cfg.probe_voltage, &cfg, &mut rng)).collect::<Result<Vec<_>, _>>()?;
        let q = percentiles(&draws, &[10.0, 90.0])?;
        println!("R = {:.0} Ω: median estimate {:.1} Ω, p10..p90 {:.1}..{:.1}", p.resistance, median(&draws)?, q[0], q[1]);
    }
    Ok(())
}
