//! Paired flux-tracking and voltage-feedforward campaigns around a series
//! resistance step, written to `target/examples-out/compare`.

use std::path::Path;

use softland::campaign::{self, CampaignConfig, ResistanceStep};

fn main() -> softland::Result<()> {
    let cfg = CampaignConfig {
        n_relays: 8,
        n_operations: 150,
        resistance_step: Some(ResistanceStep { ohms: 150.0, at_operation: 101 }),
        ..CampaignConfig::default()
    };
    let cmp = campaign::compare(&cfg)?;
    campaign::write_comparison(&cfg, &cmp, Path::new("target/examples-out/compare"))?;
    for (n, f, v) in cmp.median_curves().into_iter().filter(|(n, _, _)| n % 10 == 0 || *n == 101) {
        println!("operation {n:3}: median normalized cost flux {f:.3}, voltage {v:.3}");
    }
    for (name, r) in [("flux", &cmp.flux), ("voltage", &cmp.voltage)] {
        let before = campaign::median(&r.pooled_costs(51, 100))?;
        let after = campaign::median(&r.pooled_costs(101, 150))?;
        println!("{name}: {:+.1}% after the step", (after / before - 1.0) * 100.0);
    }
    Ok(())
}
