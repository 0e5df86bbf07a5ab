//! Inner real-time loop: resistance estimate from a static probe, flux
//! estimation from electrical measurements, and the saturated PI flux
//! controller. Also hosts the closed-loop analysis of the linearized loop
//! `λ̇ = −a·λ + u`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiGains {
    /// Proportional gain (V/Wb).
    pub kp: f64,
    /// Integral gain (V/(Wb·s)).
    pub ki: f64,
}

impl Default for PiGains {
    fn default() -> Self {
        Self { kp: 37_500.0, ki: 1.15e8 }
    }
}

impl PiGains {
    pub fn validate(&self) -> Result<()> {
        if self.kp > 0.0 && self.ki > 0.0 && self.kp.is_finite() && self.ki.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("PI gains must be positive, got {self:?}")))
        }
    }
}

/// Outcome of applying a small constant voltage to the coil at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub voltage: f64,
    /// Measured steady-state current (A).
    pub current: f64,
}

/// Ohm's law on the probe: `R̂ = v / i_ss`.
pub fn estimate_resistance(probe: &ProbeResult) -> Result<f64> {
    if !(probe.current > 0.0) || !(probe.voltage > 0.0) {
        return Err(Error::Probe(format!(
            "non-positive probe reading ({} V, {} A)",
            probe.voltage, probe.current
        )));
    }
    Ok(probe.voltage / probe.current)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorRule {
    Euler,
    /// Trapezoidal on the current; the applied voltage is piecewise constant
    /// over a control period so it integrates exactly.
    Trapezoidal,
}

/// Open-loop flux estimator `λ̂ = ∫ (v − R̂·i) dt`, reset at the start of
/// every operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxEstimator {
    pub r_hat: f64,
    pub lambda_hat: f64,
    pub rule: EstimatorRule,
    last_current: Option<f64>,
}

impl FluxEstimator {
    pub fn new(r_hat: f64, rule: EstimatorRule) -> Self {
        Self { r_hat, lambda_hat: 0.0, rule, last_current: None }
    }

    /// Start a new operation from a known flux (zero for a de-energized coil).
    pub fn reset(&mut self, lambda0: f64, current0: f64) {
        self.lambda_hat = lambda0;
        self.last_current = Some(current0);
    }

    /// Advance over one period during which voltage `v` was applied and at
    /// whose end the current `i` was measured.
    pub fn step(&mut self, v: f64, i: f64, dt: f64) -> f64 {
        let i_avg = match (self.rule, self.last_current) {
            (EstimatorRule::Trapezoidal, Some(prev)) => 0.5 * (prev + i),
            _ => i,
        };
        self.lambda_hat += (v - self.r_hat * i_avg) * dt;
        self.last_current = Some(i);
        self.lambda_hat
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VoltageLimits {
    pub min: f64,
    pub max: f64,
}

impl Default for VoltageLimits {
    fn default() -> Self {
        Self { min: 0.0, max: 35.0 }
    }
}

impl VoltageLimits {
    pub fn clamp(&self, u: f64) -> f64 {
        u.clamp(self.min, self.max)
    }

    pub fn contains(&self, u: f64) -> bool {
        self.min <= u && u <= self.max
    }
}

/// Controller memory carried between control periods.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerState {
    /// Integral of the flux error (Wb·s).
    pub sigma: f64,
    pub last_command: f64,
    pub r_hat: f64,
    pub lambda_hat: f64,
    /// Whether the last command hit a limit.
    pub saturated: bool,
}

/// Parallel-form PI with conditional integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PiController {
    pub gains: PiGains,
    pub limits: VoltageLimits,
    pub state: ControllerState,
}

impl PiController {
    pub fn new(gains: PiGains, limits: VoltageLimits) -> Self {
        Self { gains, limits, state: ControllerState::default() }
    }

    /// `u = kp·e + ki·σ`; σ integrates only while `u` is inside the limits.
    pub fn step(&mut self, lambda_d: f64, lambda_hat: f64, dt: f64) -> f64 {
        let e = lambda_d - lambda_hat;
        let raw = self.gains.kp * e + self.gains.ki * self.state.sigma;
        let inside = self.limits.contains(raw);
        if inside {
            self.state.sigma += e * dt;
        }
        let u = self.limits.clamp(raw);
        self.state.saturated = !inside;
        self.state.last_command = u;
        self.state.lambda_hat = lambda_hat;
        u
    }
}

/// Eigenvalues of `[[−a−kp, ki], [−1, 0]]`, i.e. the roots of
/// `s² + (a+kp)·s + ki`. The real branch uses the cancellation-free form
/// (the product of the roots is `ki`).
pub fn closed_loop_eigenvalues(a: f64, gains: &PiGains) -> [Complex64; 2] {
    let b = a + gains.kp;
    let disc = b * b - 4.0 * gains.ki;
    if disc >= 0.0 {
        let big = -0.5 * (b + disc.sqrt());
        let small = if big != 0.0 { gains.ki / big } else { 0.0 };
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(-0.5 * b, im), Complex64::new(-0.5 * b, -im)]
    }
}

/// Sampled response of the discrete PI loop on the linear plant.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearResponse {
    pub dt: f64,
    pub lambda: Vec<f64>,
    pub command: Vec<f64>,
}

impl LinearResponse {
    /// First time after which `|λ − target| ≤ band·|target|` holds for the
    /// rest of the record; `None` if it never settles.
    pub fn settling_time(&self, target: f64, band: f64) -> Option<f64> {
        let tol = band * target.abs();
        let last_out = self.lambda.iter().rposition(|l| (l - target).abs() > tol);
        match last_out {
            None => Some(0.0),
            Some(k) if k + 1 < self.lambda.len() => Some((k + 1) as f64 * self.dt),
            Some(_) => None,
        }
    }
}

/// Step response of the sampled loop: plant `λ̇ = −a·λ + u` discretized
/// exactly under zero-order hold, PI updated every `dt` with exact flux
/// feedback. `limits = None` gives the purely linear loop.
pub fn linear_step_response(
    a: f64,
    gains: &PiGains,
    lambda_d: f64,
    dt: f64,
    duration: f64,
    limits: Option<VoltageLimits>,
) -> LinearResponse {
    let unlimited = VoltageLimits { min: f64::NEG_INFINITY, max: f64::INFINITY };
    let mut pi = PiController::new(*gains, limits.unwrap_or(unlimited));
    let decay = (-a * dt).exp();
    let gain = if a > 0.0 { (1.0 - decay) / a } else { dt };
    let n = (duration / dt).round() as usize;
    let mut lambda = 0.0;
    let mut out = LinearResponse { dt, lambda: Vec::with_capacity(n + 1), command: Vec::with_capacity(n + 1) };
    out.lambda.push(lambda);
    for _ in 0..n {
        let u = pi.step(lambda_d, lambda, dt);
        lambda = decay * lambda + gain * u;
        out.command.push(u);
        out.lambda.push(lambda);
    }
    out
}
