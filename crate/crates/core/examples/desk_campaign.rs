//! A small flux-tracking campaign with percentile bands per operation.
//!
//! cargo run --release --example desk_campaign -- [relays] [operations]

use softland::campaign::{self, CampaignConfig, ResistanceStep};

fn main() -> softland::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n_relays = args.next().unwrap_or(6);
    let n_operations = args.next().unwrap_or(120);
    let cfg = CampaignConfig {
        n_relays,
        n_operations,
        resistance_step: Some(ResistanceStep { ohms: 150.0, at_operation: n_operations * 5 / 6 + 1 }),
        ..CampaignConfig::default()
    };
    let result = campaign::run_campaign(&cfg)?;
    println!("baseline median cost {:.4e}", result.baseline.median);
    println!("operation    p10    p50    p90   R̂ p50");
    for s in result.stats.per_index.iter().filter(|s| s.operation == 1 || s.operation % 10 == 0) {
        println!(
            "{:9} {:6.3} {:6.3} {:6.3} {:7.1}",
            s.operation, s.cost_norm.p10, s.cost_norm.p50, s.cost_norm.p90, s.r_hat.p50
        );
    }
    Ok(())
}
