use proptest::prelude::*;

use softland::relay::{self, RelayParams};

fn nominal() -> RelayParams {
    RelayParams::default()
}

proptest! {
    #[test]
    fn elastic_torque_is_continuous_at_the_stage_boundaries(eps in 1e-12f64..1e-9) {
        let p = nominal();
        let (m, g) = (p.mech, p.geometry);
        for b in [g.theta_nc, g.theta_no] {
            let jump = relay::elastic_torque(b + eps, &m, &g) - relay::elastic_torque(b - eps, &m, &g);
            // slope is at most k1 + k2 + k3 on either side
            prop_assert!(jump.abs() <= 2.0 * eps * (m.k1 + m.k2 + m.k3) * (1.0 + 1e-9));
        }
    }

    #[test]
    fn elastic_torque_opens_the_relay(frac in 0.0f64..1.0) {
        let p = nominal();
        let theta = frac * p.geometry.theta_max;
        prop_assert!(relay::elastic_torque(theta, &p.mech, &p.geometry) > 0.0);
    }

    #[test]
    fn elastic_energy_is_the_torque_potential(frac in 0.01f64..0.99) {
        let p = nominal();
        let theta = frac * p.geometry.theta_max;
        let h = 1e-7 * p.geometry.theta_max;
        let e = |t: f64| relay::elastic_energy(t, &p.mech, &p.geometry);
        let fd = -(e(theta + h) - e(theta - h)) / (2.0 * h);
        let torque = relay::elastic_torque(theta, &p.mech, &p.geometry);
        prop_assert!((fd - torque).abs() <= 1e-6 * torque.abs() + 1e-9, "{fd} vs {torque}");
    }

    #[test]
    fn coil_current_increases_with_flux(frac in 0.0f64..1.0, l1 in 0.0f64..0.19, dl in 1e-6f64..0.01) {
        let p = nominal();
        let theta = frac * p.geometry.theta_max;
        let l2 = (l1 + dl).min(0.1999);
        prop_assume!(l2 > l1);
        let i1 = relay::coil_current(theta, l1, &p.magnetic).unwrap();
        let i2 = relay::coil_current(theta, l2, &p.magnetic).unwrap();
        prop_assert!(i2 > i1);
    }

    #[test]
    fn magnetic_torque_closes_the_relay(frac in 0.0f64..1.0, lambda in -0.19f64..0.19) {
        let p = nominal();
        let t = relay::magnetic_torque(frac * p.geometry.theta_max, lambda, &p.magnetic).unwrap();
        prop_assert!(t <= 0.0);
    }

    #[test]
    fn flux_derivative_is_voltage_minus_ohmic_drop(frac in 0.0f64..1.0, lambda in 0.0f64..0.19, u in 0.0f64..35.0) {
        let p = nominal();
        let theta = frac * p.geometry.theta_max;
        let i = relay::coil_current(theta, lambda, &p.magnetic).unwrap();
        let d = relay::flux_derivative(theta, lambda, u, p.resistance, &p.magnetic).unwrap();
        prop_assert!((d - (u - p.resistance * i)).abs() <= 1e-12 * (u.abs() + 1.0));
    }
}

#[test]
fn core_reluctance_rejects_saturated_flux() {
    let p = nominal();
    assert!(relay::core_reluctance(p.magnetic.lambda_sat, &p.magnetic).is_err());
    assert!(relay::core_reluctance(0.0, &p.magnetic).unwrap() == p.magnetic.g_c0);
}
