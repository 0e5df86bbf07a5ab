use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use softland::campaign::default_spreads;
use softland::operation::{run_operation, ControlMode, ControlStack, Timing};
use softland::plant::{perturb_params, probe_resistance, Drive, ImpactEvent, ImpactKind, PlantState, SimConfig, Simulator};
use softland::r2r::CostConfig;
use softland::relay::RelayParams;
use softland::trajectory::Direction;

fn standard_closing(step: f64) -> (Vec<ImpactEvent>, Vec<PlantState>) {
    let p = RelayParams::default();
    let cfg = SimConfig { integration_step: step, ..SimConfig::default() };
    let mut sim = Simulator::new(p, cfg, PlantState::rest(&p));
    let n = (cfg.duration / cfg.control_period).round() as usize;
    let mut states = Vec::with_capacity(n);
    for _ in 0..n {
        sim.advance(Drive::Voltage(cfg.supply_voltage), cfg.control_period).unwrap();
        states.push(sim.state);
    }
    (sim.events, states)
}

#[test]
fn refined_step_reproduces_the_closing() {
    // oracle: the same closing at a tenth of the step
    let (ev, states) = standard_closing(1e-6);
    let (ev_ref, states_ref) = standard_closing(1e-7);
    let first = |e: &[ImpactEvent]| *e.iter().find(|e| e.kind == ImpactKind::ArmatureStopLow).unwrap();
    let (a, b) = (first(&ev), first(&ev_ref));
    assert!((a.time - b.time).abs() < 1e-4 * b.time);
    assert!((a.impact_speed - b.impact_speed).abs() < 1e-4 * b.impact_speed);
    // the free flight before the first impact
    let stroke = RelayParams::default().geometry.theta_max;
    for (s, r) in states.iter().zip(&states_ref).filter(|(s, _)| s.time < b.time) {
        assert!((s.theta - r.theta).abs() < 1e-4 * stroke);
        assert!((s.lambda - r.lambda).abs() < 1e-4 * r.lambda.abs().max(1e-6));
    }
}

#[test]
fn events_are_time_ordered() {
    let (ev, _) = standard_closing(1e-6);
    assert!(ev.windows(2).all(|w| w[0].time <= w[1].time));
    // making crosses θ_NC before θ_NO before reaching the core
    let pos = |k: ImpactKind| ev.iter().position(|e| e.kind == k).unwrap();
    assert!(pos(ImpactKind::ContactTouchNc) < pos(ImpactKind::ContactTouchNo));
    assert!(pos(ImpactKind::ContactTouchNo) < pos(ImpactKind::ArmatureStopLow));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn operations_stay_in_the_stroke_and_balance_energy(
        seed in any::<u64>(),
        mode in prop::sample::select(vec![ControlMode::Standard, ControlMode::FluxTracking, ControlMode::VoltageFeedforward]),
        making in any::<bool>(),
    ) {
        let nominal = RelayParams::default();
        let unit = perturb_params(&nominal, &default_spreads(), seed).unwrap();
        let dir = if making { Direction::Making } else { Direction::Breaking };
        let stack = ControlStack::new(mode, dir, &nominal, nominal.param_vector(), unit.resistance, Timing::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rec = run_operation(&stack, &unit, &SimConfig::default(), &CostConfig::default(), 1, &mut rng).unwrap();
        for s in &rec.samples {
            prop_assert!(s.theta >= 0.0 && s.theta <= unit.geometry.theta_max, "θ = {}", s.theta);
        }
        prop_assert!(rec.energy.relative_residual() < 1e-6);
        prop_assert!(rec.cost >= 0.0 && rec.cost.is_finite());
    }

    #[test]
    fn perturbed_units_are_valid_and_reproducible(seed in any::<u64>()) {
        let nominal = RelayParams::default();
        let a = perturb_params(&nominal, &default_spreads(), seed).unwrap();
        prop_assert_eq!(a, perturb_params(&nominal, &default_spreads(), seed).unwrap());
        prop_assert!(a.validate().is_ok());
    }
}

#[test]
fn probe_is_unbiased_with_the_configured_scatter() {
    let p = RelayParams::default();
    let cfg = SimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 2000;
    let draws: Vec<f64> = (0..n).map(|_| probe_resistance(&p, cfg.probe_voltage, &cfg, &mut rng).unwrap()).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let sd = (draws.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let sigma = cfg.measurement.probe_current_sigma * p.resistance;
    // standard error of the mean is σ/√n; allow four of them
    assert!((mean - p.resistance).abs() < 4.0 * sigma / (n as f64).sqrt() + 1e-3 * sigma, "mean {mean}");
    assert!((sd / sigma - 1.0).abs() < 0.1, "sd {sd} vs {sigma}");
}

#[test]
fn probe_refuses_to_move_the_armature() {
    let p = RelayParams::default();
    let cfg = SimConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(probe_resistance(&p, cfg.supply_voltage, &cfg, &mut rng).is_err());
}
