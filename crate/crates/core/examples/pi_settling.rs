//! Closed-loop poles and the sampled step response of the flux PI loop.

use softland::flux::{closed_loop_eigenvalues, linear_step_response, PiGains, VoltageLimits};
use softland::relay::{self, RelayParams};

fn main() -> softland::Result<()> {
    let p = RelayParams::default();
    let gains = PiGains::default();
    for theta in [p.geometry.theta_max, p.geometry.theta_no, 0.0] {
        let a = p.resistance * (p.magnetic.g_c0 + relay::gap_reluctance(theta, &p.magnetic)?);
        let [s1, s2] = closed_loop_eigenvalues(a, &gains);
        let linear = linear_step_response(a, &gains, 0.05, 1e-5, 5e-3, None);
        let limited = linear_step_response(a, &gains, 0.05, 1e-5, 5e-3, Some(VoltageLimits::default()));
        let ms = |t: Option<f64>| t.map_or("never".to_string(), |t| format!("{:.3} ms", t * 1e3));
        println!(
            "θ = {theta:.4} rad, a = {a:7.1} 1/s: poles {s1:.1}, {s2:.1}; 5% settling {} (linear), {} (0..35 V)",
            ms(linear.settling_time(0.05, 0.05)),
            ms(limited.settling_time(0.05, 0.05)),
        );
    }
    Ok(())
}
