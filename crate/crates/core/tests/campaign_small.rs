use proptest::prelude::*;

use softland::campaign::{self, percentiles, CampaignConfig, ResistanceStep, LEVELS};
use softland::operation::ControlMode;
use softland::Error;

fn tiny() -> CampaignConfig {
    CampaignConfig {
        n_relays: 2,
        n_repetitions: 2,
        n_operations: 12,
        n_baseline: 3,
        resistance_step: Some(ResistanceStep { ohms: 150.0, at_operation: 7 }),
        ..CampaignConfig::default()
    }
}

// smallest sample value with at least q% of the data at or below it
fn percentile_oracle(values: &[f64], q: f64) -> f64 {
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    *sorted
        .iter()
        .find(|&&x| values.iter().filter(|&&v| v <= x).count() as f64 * 100.0 >= q * n)
        .unwrap()
}

proptest! {
    #[test]
    fn percentiles_match_the_definition(values in prop::collection::vec(-1e3f64..1e3, 1..60)) {
        let got = percentiles(&values, &LEVELS).unwrap();
        for (g, q) in got.iter().zip(LEVELS) {
            prop_assert_eq!(*g, percentile_oracle(&values, q));
        }
        prop_assert!(got.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn campaign_statistics_are_ordered_and_complete() {
    let cfg = tiny();
    let result = campaign::run_campaign(&cfg).unwrap();
    assert!(result.aborted().is_empty());
    assert_eq!(result.trials.len(), 4);
    assert_eq!(result.stats.per_index.len(), cfg.n_operations);
    for s in &result.stats.per_index {
        assert_eq!(s.trials, 4);
        assert!(s.cost_norm.as_array().windows(2).all(|w| w[0] <= w[1]));
        assert!(s.r_hat.as_array().windows(2).all(|w| w[0] <= w[1]));
    }
    // nearest-rank median of the baseline is one of its costs
    assert_eq!(result.stats.baseline_nominal.p50, 1.0);
}

#[test]
fn single_trial_percentiles_collapse_to_its_costs() {
    let cfg = CampaignConfig { n_relays: 1, n_repetitions: 1, ..tiny() };
    let result = campaign::run_campaign(&cfg).unwrap();
    for (s, o) in result.stats.per_index.iter().zip(&result.trials[0].operations) {
        assert_eq!(s.cost_norm.as_array(), [o.cost_norm; 5]);
    }
}

#[test]
fn standard_mode_leaves_the_optimizer_alone() {
    let cfg = CampaignConfig { controller_mode: ControlMode::Standard, n_relays: 1, n_repetitions: 1, ..tiny() };
    let result = campaign::run_campaign(&cfg).unwrap();
    let nominal = cfg.nominal.param_vector();
    for o in &result.trials[0].operations {
        assert_eq!(o.candidate, nominal);
        assert_eq!(o.phase, "none");
    }
}

#[test]
fn resistance_estimate_jumps_at_the_configured_operation() {
    let mut cfg = CampaignConfig { n_relays: 1, n_repetitions: 1, resistance_jitter: 0.0, ..tiny() };
    cfg.sim.measurement.probe_current_sigma = 0.0;
    let result = campaign::run_campaign(&cfg).unwrap();
    let ops = &result.trials[0].operations;
    let at = 7;
    for w in ops.windows(2) {
        let jump = w[1].r_hat - w[0].r_hat;
        if w[1].operation == at {
            assert!((jump - 150.0).abs() < 1e-6 * w[1].r_hat, "jump {jump}");
        } else {
            assert!(jump.abs() < 1e-9 * w[1].r_hat, "drift {jump} at {}", w[1].operation);
        }
    }
}

#[test]
fn reruns_are_identical_and_independent_of_workers() {
    let cfg = tiny();
    let a = campaign::with_workers(1, || campaign::run_campaign(&cfg)).unwrap().unwrap();
    let b = campaign::with_workers(2, || campaign::run_campaign(&cfg)).unwrap().unwrap();
    assert_eq!(a, b);
    let other = campaign::run_campaign(&CampaignConfig { seed: cfg.seed + 1, ..cfg.clone() }).unwrap();
    assert_ne!(a.trials[0].operations[0].cost, other.trials[0].operations[0].cost);
}

#[test]
fn campaign_files_are_written() {
    let cfg = tiny();
    let result = campaign::run_campaign(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    campaign::write_campaign(&cfg, "campaign", &result, dir.path(), "").unwrap();
    let trial = std::fs::read_to_string(dir.path().join(campaign::trial_file_name(1, 1))).unwrap();
    assert_eq!(trial.lines().count(), 1 + cfg.n_operations);
    assert!(trial.starts_with("operation,resistance_true,r_hat,cost,cost_norm"));
    let stats = std::fs::read_to_string(dir.path().join("stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 1 + cfg.n_operations);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["trials"].as_array().unwrap().len(), 4);
    assert_eq!(manifest["config"]["n_operations"], 12);
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = tiny();
    let text = cfg.to_toml().unwrap();
    assert_eq!(CampaignConfig::from_toml(&text).unwrap(), cfg);
}

#[test]
fn partial_config_takes_defaults() {
    let cfg = CampaignConfig::from_toml("n_relays = 3\n[sim]\nduration = 0.012\n").unwrap();
    assert_eq!(cfg.n_relays, 3);
    assert_eq!(cfg.sim.duration, 0.012);
    assert_eq!(cfg.n_operations, CampaignConfig::default().n_operations);
}

#[test]
fn unknown_keys_are_rejected_at_any_depth() {
    for text in ["n_relay = 3\n", "[sim]\nstep = 1e-6\n", "[optimizer]\nalpha = 1.0\n", "[nominal.mech]\nmass = 1.0\n"] {
        assert!(matches!(CampaignConfig::from_toml(text), Err(Error::Config(_))), "{text}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let bad = [
        CampaignConfig { n_relays: 0, ..tiny() },
        CampaignConfig { resistance_step: Some(ResistanceStep { ohms: 150.0, at_operation: 13 }), ..tiny() },
        CampaignConfig { controller_mode: ControlMode::IdealTracking, ..tiny() },
        CampaignConfig { resistance_jitter: -1.0, ..tiny() },
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err());
    }
}
