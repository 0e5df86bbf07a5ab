//! Hybrid simulator of one relay: the continuous electromagnetic and
//! mechanical dynamics integrated with classical RK4, plus localized events
//! for the contact thresholds and the two hard stops of the armature.
//!
//! The integrator carries two extra quadrature states, the work done by the
//! magnetic torque and the energy dissipated by damping, so that every
//! operation can be audited against the change of mechanical energy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{estimate_resistance, ProbeResult};
use crate::relay::{self, RelayParams};

/// Motion stage implied by the armature position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Only the armature and the plastic part move.
    Free,
    /// The plastic part pushes and bends the moving contact.
    ContactPushed,
    /// The moving contact rests on the NO terminal and keeps deforming.
    ContactDeforming,
}

impl Stage {
    pub fn of(theta: f64, geo: &relay::Geometry) -> Self {
        if theta > geo.theta_nc {
            Stage::Free
        } else if theta >= geo.theta_no {
            Stage::ContactPushed
        } else {
            Stage::ContactDeforming
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantState {
    pub theta: f64,
    pub omega: f64,
    pub lambda: f64,
    pub time: f64,
    pub stage: Stage,
}

impl PlantState {
    /// De-energized armature at its rest position.
    pub fn rest(params: &RelayParams) -> Self {
        let theta = params.geometry.theta_max;
        Self { theta, omega: 0.0, lambda: 0.0, time: 0.0, stage: Stage::of(theta, &params.geometry) }
    }

    /// Closed armature held by the steady flux of a constant coil voltage.
    pub fn closed(params: &RelayParams, voltage: f64) -> Result<Self> {
        let lambda = steady_flux(0.0, voltage / params.resistance, &params.magnetic)?;
        Ok(Self { theta: 0.0, omega: 0.0, lambda, time: 0.0, stage: Stage::ContactDeforming })
    }
}

/// Flux linkage at which the coil carries `current` with the armature at
/// `theta`, found by bisection on the monotone current-flux relation.
pub fn steady_flux(theta: f64, current: f64, m: &relay::MagneticParams) -> Result<f64> {
    if current == 0.0 {
        return Ok(0.0);
    }
    let sign = current.signum();
    let target = current.abs();
    let (mut lo, mut hi) = (0.0, m.lambda_sat);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if relay::coil_current(theta, mid, m)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(sign * 0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImpactKind {
    /// Armature reaches the core (θ = 0).
    ArmatureStopLow,
    /// Armature returns to its rest stop (θ = θ_max).
    ArmatureStopHigh,
    /// Armature crosses θ_NO.
    ContactTouchNo,
    /// Armature crosses θ_NC.
    ContactTouchNc,
}

impl ImpactKind {
    pub fn is_armature_stop(self) -> bool {
        matches!(self, ImpactKind::ArmatureStopLow | ImpactKind::ArmatureStopHigh)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactEvent {
    pub time: f64,
    pub kind: ImpactKind,
    /// |ω| just before the event (rad/s).
    pub impact_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AudioConfig {
    pub sample_rate: f64,
    /// Burst amplitude per unit impact speed at the armature stops.
    pub burst_gain: f64,
    pub burst_frequency: f64,
    /// Exponential decay time of a burst (s).
    pub burst_decay: f64,
    /// Burst amplitude per unit impact speed at the contact thresholds.
    pub contact_gain: f64,
    /// Standard deviation of the additive background noise.
    pub noise_sigma: f64,
}

impl Default for AudioConfig {
    fn default() -> Self {
        Self {
            sample_rate: 50_000.0,
            burst_gain: 1.0,
            burst_frequency: 5_000.0,
            burst_decay: 1e-3,
            contact_gain: 0.2,
            noise_sigma: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasurementNoise {
    /// Absolute standard deviation of the sampled coil current (A).
    pub current_sigma: f64,
    /// Absolute standard deviation of the applied voltage (V).
    pub voltage_sigma: f64,
    /// Relative standard deviation of the probe current reading.
    pub probe_current_sigma: f64,
}

impl Default for MeasurementNoise {
    fn default() -> Self {
        Self { current_sigma: 0.0, voltage_sigma: 0.0, probe_current_sigma: 0.002 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Largest RK4 step (s).
    pub integration_step: f64,
    /// Control period (s); the plant is sub-stepped in between.
    pub control_period: f64,
    /// Simulated duration of one operation (s).
    pub duration: f64,
    /// Newtonian restitution at the armature stops.
    pub restitution_armature: f64,
    /// Impacts slower than this leave the armature resting on the stop (rad/s).
    pub stick_speed: f64,
    /// Time resolution of event localization (s).
    pub event_resolution: f64,
    pub supply_voltage: f64,
    pub max_voltage: f64,
    pub probe_voltage: f64,
    /// Largest static deflection accepted during the probe, as a fraction of
    /// the free travel `θ_max − θ_NC`.
    pub probe_deflection_limit: f64,
    pub audio: AudioConfig,
    pub measurement: MeasurementNoise,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            integration_step: 1e-6,
            control_period: 1e-5,
            duration: 15e-3,
            restitution_armature: 0.3,
            stick_speed: 1e-3,
            event_resolution: 1e-9,
            supply_voltage: 24.0,
            max_voltage: 35.0,
            probe_voltage: 1.0,
            probe_deflection_limit: 0.5,
            audio: AudioConfig::default(),
            measurement: MeasurementNoise::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.integration_step > 0.0
            && self.control_period > 0.0
            && self.duration > 0.0
            && (0.0..1.0).contains(&self.restitution_armature)
            && self.supply_voltage > 0.0
            && self.max_voltage > 0.0
            && self.event_resolution > 0.0
            && self.audio.sample_rate > 0.0
            && self.audio.noise_sigma >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid simulation settings: {self:?}")))
        }
    }
}

/// Energy bookkeeping of the mechanical subsystem over a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyAudit {
    pub initial: f64,
    pub last: f64,
    pub magnetic_work: f64,
    pub damping_loss: f64,
    pub impact_loss: f64,
    /// Largest magnitude among the terms, used to scale the residual.
    pub scale: f64,
}

impl EnergyAudit {
    /// `E_end − E_start − W_mag + D + L_impact`, which vanishes for an exact
    /// integration.
    pub fn residual(&self) -> f64 {
        self.last - self.initial - self.magnetic_work + self.damping_loss + self.impact_loss
    }

    pub fn relative_residual(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual().abs() / self.scale
        } else {
            self.residual().abs()
        }
    }
}

/// Mechanical energy: kinetic plus elastic.
pub fn mechanical_energy(state: &PlantState, params: &RelayParams) -> f64 {
    0.5 * params.mech.inertia * state.omega * state.omega
        + relay::elastic_energy(state.theta, &params.mech, &params.geometry)
}

/// How the coil is driven over an integration interval.
#[derive(Clone, Copy)]
pub enum Drive<'a> {
    /// Constant terminal voltage (V).
    Voltage(f64),
    /// Flux linkage imposed as a function of absolute time.
    Flux(&'a dyn Fn(f64) -> f64),
}

// integrated vector: θ, ω, λ, magnetic work, damping loss
type Aug = [f64; 5];

fn axpy(x: &Aug, h: f64, k: &Aug) -> Aug {
    std::array::from_fn(|i| x[i] + h * k[i])
}

/// Stateful simulator of one relay unit.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub params: RelayParams,
    pub cfg: SimConfig,
    pub state: PlantState,
    pub events: Vec<ImpactEvent>,
    pub energy: EnergyAudit,
}

impl Simulator {
    pub fn new(params: RelayParams, cfg: SimConfig, state: PlantState) -> Self {
        let e0 = mechanical_energy(&state, &params);
        let energy = EnergyAudit { initial: e0, last: e0, scale: e0.abs(), ..Default::default() };
        Self { params, cfg, state, events: Vec::new(), energy }
    }

    fn derivatives(&self, t: f64, x: &Aug, drive: Drive<'_>, locked: bool) -> Result<Aug> {
        let p = &self.params;
        // trial stages of a step that overshoots the core stop see the gap
        // closed rather than a negative one
        let (theta, omega) = (x[0].max(0.0), x[1]);
        let (lambda, dlambda) = match drive {
            Drive::Voltage(u) => (x[2], relay::flux_derivative(theta, x[2], u, p.resistance, &p.magnetic)?),
            Drive::Flux(f) => (f(t), 0.0),
        };
        if locked {
            return Ok([0.0, 0.0, dlambda, 0.0, 0.0]);
        }
        let mag = relay::magnetic_torque(theta, lambda, &p.magnetic)?;
        let el = relay::elastic_torque(x[0], &p.mech, &p.geometry);
        let acc = (mag + el - p.mech.damping * omega) / p.mech.inertia;
        Ok([omega, acc, dlambda, mag * omega, p.mech.damping * omega * omega])
    }

    fn rk4(&self, t: f64, x: &Aug, h: f64, drive: Drive<'_>, locked: bool) -> Result<Aug> {
        let k1 = self.derivatives(t, x, drive, locked)?;
        let k2 = self.derivatives(t + 0.5 * h, &axpy(x, 0.5 * h, &k1), drive, locked)?;
        let k3 = self.derivatives(t + 0.5 * h, &axpy(x, 0.5 * h, &k2), drive, locked)?;
        let k4 = self.derivatives(t + h, &axpy(x, h, &k3), drive, locked)?;
        let mut out: Aug = std::array::from_fn(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
        if let Drive::Flux(f) = drive {
            out[2] = f(t + h);
        }
        Ok(out)
    }

    /// Whether the armature rests on a stop with the net torque pressing it
    /// into that stop.
    fn is_locked(&self, t: f64, x: &Aug, drive: Drive<'_>) -> Result<bool> {
        let geo = &self.params.geometry;
        let at_low = x[0] <= 0.0;
        let at_high = x[0] >= geo.theta_max;
        if x[1] != 0.0 || !(at_low || at_high) {
            return Ok(false);
        }
        let acc = self.derivatives(t, x, drive, false)?[1];
        Ok((at_low && acc <= 0.0) || (at_high && acc >= 0.0))
    }

    /// Earliest threshold crossed between `x0` and `x1`, if any.
    fn crossing(&self, x0: &Aug, x1: &Aug) -> Option<(ImpactKind, f64)> {
        let geo = &self.params.geometry;
        let (a, b) = (x0[0], x1[0]);
        if b < 0.0 && a >= 0.0 {
            return Some((ImpactKind::ArmatureStopLow, 0.0));
        }
        if b > geo.theta_max && a <= geo.theta_max {
            return Some((ImpactKind::ArmatureStopHigh, geo.theta_max));
        }
        let crosses = |level: f64| (a - level) * (b - level) < 0.0;
        // moving down the NC threshold comes first, moving up NO does
        let order = if b < a {
            [(ImpactKind::ContactTouchNc, geo.theta_nc), (ImpactKind::ContactTouchNo, geo.theta_no)]
        } else {
            [(ImpactKind::ContactTouchNo, geo.theta_no), (ImpactKind::ContactTouchNc, geo.theta_nc)]
        };
        order.into_iter().find(|&(_, level)| crosses(level))
    }

    fn accept(&mut self, t: f64, x: &Aug) {
        self.state.theta = x[0];
        self.state.omega = x[1];
        self.state.lambda = x[2];
        self.state.time = t;
        self.state.stage = Stage::of(x[0], &self.params.geometry);
        self.energy.magnetic_work += x[3];
        self.energy.damping_loss += x[4];
        self.energy.last = mechanical_energy(&self.state, &self.params);
        let e = &mut self.energy;
        e.scale = e.scale.max(e.last.abs()).max(e.magnetic_work.abs()).max(e.damping_loss).max(e.impact_loss);
    }

    fn substep(&mut self, drive: Drive<'_>, h: f64) -> Result<()> {
        let t_end = self.state.time + h;
        let mut guard = 0;
        while self.state.time < t_end {
            guard += 1;
            if guard > 10_000 {
                return Err(Error::Simulation {
                    time: self.state.time,
                    source: Box::new(Error::Config("event localization did not progress".into())),
                });
            }
            let t = self.state.time;
            let remaining = t_end - t;
            let x0: Aug = [self.state.theta, self.state.omega, self.state.lambda, 0.0, 0.0];
            let locked = self.is_locked(t, &x0, drive)?;
            let x1 = self.rk4(t, &x0, remaining, drive, locked)?;
            let hit = if locked { None } else { self.crossing(&x0, &x1) };
            let Some((kind, level)) = hit else {
                self.accept(t_end, &x1);
                break;
            };

            let (mut lo, mut hi) = (0.0, remaining);
            let mut x_lo = x0;
            let mut x_hi = x1;
            while hi - lo > self.cfg.event_resolution {
                let mid = 0.5 * (lo + hi);
                let xm = self.rk4(t, &x0, mid, drive, false)?;
                if self.crossing(&x0, &xm).is_some() {
                    hi = mid;
                    x_hi = xm;
                } else {
                    lo = mid;
                    x_lo = xm;
                }
            }
            // a final secant step puts the state on the threshold to rounding
            let (kind, level) = self.crossing(&x0, &x_hi).unwrap_or((kind, level));
            let frac = ((level - x_lo[0]) / (x_hi[0] - x_lo[0])).clamp(0.0, 1.0);
            let tau = lo + frac * (hi - lo);
            let mut xs = if tau > 0.0 { self.rk4(t, &x0, tau, drive, false)? } else { x0 };
            xs[0] = level;
            let speed = xs[1].abs();
            self.accept(t + tau, &xs);

            if kind.is_armature_stop() {
                let before = self.state.omega;
                let after = if speed < self.cfg.stick_speed { 0.0 } else { -self.cfg.restitution_armature * before };
                self.state.omega = after;
                self.energy.impact_loss += 0.5 * self.params.mech.inertia * (before * before - after * after);
                self.energy.last = mechanical_energy(&self.state, &self.params);
            }
            self.events.push(ImpactEvent { time: t + tau, kind, impact_speed: speed });
        }
        Ok(())
    }

    /// Advance by `dt` with the given coil drive, sub-stepping at the
    /// configured integration step.
    pub fn advance(&mut self, drive: Drive<'_>, dt: f64) -> Result<()> {
        let n = ((dt / self.cfg.integration_step) - 1e-9).ceil().max(1.0) as usize;
        let h = dt / n as f64;
        let start = self.state.time;
        for k in 0..n {
            // anchor sub-step ends to the grid so rounding does not accumulate
            let target = start + (k + 1) as f64 * h;
            let step = target - self.state.time;
            if step > 0.0 {
                self.substep(drive, step).map_err(|e| match e {
                    Error::Simulation { .. } => e,
                    other => Error::Simulation { time: self.state.time, source: Box::new(other) },
                })?;
            }
        }
        Ok(())
    }

    pub fn coil_current(&self) -> Result<f64> {
        relay::coil_current(self.state.theta, self.state.lambda, &self.params.magnetic)
    }
}

/// Advance a plant state by `dt` at constant coil voltage `u`, returning the
/// new state and the events that occurred on the way.
pub fn step(
    state: &PlantState,
    u: f64,
    dt: f64,
    params: &RelayParams,
    cfg: &SimConfig,
) -> Result<(PlantState, Vec<ImpactEvent>)> {
    let mut sim = Simulator::new(*params, *cfg, *state);
    sim.advance(Drive::Voltage(u), dt)?;
    Ok((sim.state, sim.events))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AudioRecord {
    pub sample_rate: f64,
    pub start_time: f64,
    pub samples: Vec<f64>,
}

impl AudioRecord {
    pub fn end_time(&self) -> f64 {
        self.start_time + self.samples.len() as f64 / self.sample_rate
    }
}

/// Envelope amplitude of the burst an event produces.
pub fn burst_amplitude(event: &ImpactEvent, audio: &AudioConfig) -> f64 {
    let gain = if event.kind.is_armature_stop() { audio.burst_gain } else { audio.contact_gain };
    gain * event.impact_speed
}

/// Synthetic microphone signal over `[t0, t0 + length)`: one damped sinusoid
/// per event plus white background noise.
pub fn synth_audio<R: Rng + ?Sized>(
    events: &[ImpactEvent],
    t0: f64,
    length: f64,
    audio: &AudioConfig,
    rng: &mut R,
) -> AudioRecord {
    let fs = audio.sample_rate;
    let n = (length * fs).round() as usize;
    let mut samples = vec![0.0; n];
    let omega = 2.0 * std::f64::consts::PI * audio.burst_frequency;
    let horizon = 30.0 * audio.burst_decay;
    for ev in events {
        let amp = burst_amplitude(ev, audio);
        if amp == 0.0 {
            continue;
        }
        let first = ((ev.time - t0) * fs).ceil().max(0.0) as usize;
        for (k, s) in samples.iter_mut().enumerate().skip(first) {
            let tau = t0 + k as f64 / fs - ev.time;
            if tau < 0.0 {
                continue;
            }
            if tau > horizon {
                break;
            }
            *s += amp * (-tau / audio.burst_decay).exp() * (omega * tau).sin();
        }
    }
    if audio.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, audio.noise_sigma).expect("finite sigma");
        for s in &mut samples {
            *s += noise.sample(rng);
        }
    }
    AudioRecord { sample_rate: fs, start_time: t0, samples }
}

/// Probe the coil with a small constant voltage at rest and return the
/// resistance estimated from the (noisy) steady-state current.
pub fn probe_resistance<R: Rng + ?Sized>(
    params: &RelayParams,
    probe_voltage: f64,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<f64> {
    let m = &params.magnetic;
    let theta = params.geometry.theta_max;
    if !(probe_voltage > 0.0) {
        return Err(Error::Probe(format!("probe voltage {probe_voltage} V must be positive")));
    }
    let i_static = probe_voltage / params.resistance;
    let lambda_static = steady_flux(theta, i_static, m)?;
    let deflection = relay::magnetic_torque(theta, lambda_static, m)?.abs() / params.mech.k1;
    let allowed = cfg.probe_deflection_limit * (params.geometry.theta_max - params.geometry.theta_nc);
    if deflection > allowed {
        return Err(Error::Probe(format!(
            "probe of {probe_voltage} V would deflect the armature by {deflection:.3e} rad (limit {allowed:.3e})"
        )));
    }

    // electrical transient at fixed position until it settles
    let a0 = params.resistance * (m.g_c0 + relay::gap_reluctance(theta, m)?);
    let tau = 1.0 / a0;
    let h = tau / 50.0;
    let f = |l: f64| relay::flux_derivative(theta, l, probe_voltage, params.resistance, m);
    let mut lambda = 0.0;
    for _ in 0..(50 * 40) {
        let k1 = f(lambda)?;
        let k2 = f(lambda + 0.5 * h * k1)?;
        let k3 = f(lambda + 0.5 * h * k2)?;
        let k4 = f(lambda + h * k3)?;
        lambda += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    let i_ss = relay::coil_current(theta, lambda, m)?;
    let z: f64 = StandardNormal.sample(rng);
    let measured = i_ss * (1.0 + cfg.measurement.probe_current_sigma * z);
    estimate_resistance(&ProbeResult { voltage: probe_voltage, current: measured })
}

/// Relative log-normal spread per physical parameter.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Spread {
    pub g_c0: f64,
    pub lambda_sat: f64,
    pub g_g0: f64,
    pub g_g0_slope: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub inertia: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub damping: f64,
    pub theta_max: f64,
    pub theta_nc: f64,
    pub theta_no: f64,
    pub resistance: f64,
}

impl Spread {
    pub fn uniform(sigma: f64) -> Self {
        Self {
            g_c0: sigma,
            lambda_sat: sigma,
            g_g0: sigma,
            g_g0_slope: sigma,
            kappa1: sigma,
            kappa2: sigma,
            inertia: sigma,
            k1: sigma,
            k2: sigma,
            k3: sigma,
            damping: sigma,
            theta_max: sigma,
            theta_nc: sigma,
            theta_no: sigma,
            resistance: sigma,
        }
    }

    fn all(&self) -> [f64; 15] {
        [
            self.g_c0,
            self.lambda_sat,
            self.g_g0,
            self.g_g0_slope,
            self.kappa1,
            self.kappa2,
            self.inertia,
            self.k1,
            self.k2,
            self.k3,
            self.damping,
            self.theta_max,
            self.theta_nc,
            self.theta_no,
            self.resistance,
        ]
    }
}

/// Sample a unit around `nominal`: every parameter is multiplied by an
/// independent `exp(σ·z)`. Geometry draws violating the stage ordering are
/// redrawn.
pub fn perturb_params(nominal: &RelayParams, spread: &Spread, seed: u64) -> Result<RelayParams> {
    if spread.all().iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::InvalidParameter("spreads must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factor = |sigma: f64| -> f64 {
        let z: f64 = StandardNormal.sample(&mut rng);
        (sigma * z).exp()
    };
    let mut p = *nominal;
    p.magnetic.g_c0 *= factor(spread.g_c0);
    p.magnetic.lambda_sat *= factor(spread.lambda_sat);
    p.magnetic.g_g0 *= factor(spread.g_g0);
    p.magnetic.g_g0_slope *= factor(spread.g_g0_slope);
    p.magnetic.kappa1 *= factor(spread.kappa1);
    p.magnetic.kappa2 *= factor(spread.kappa2);
    p.mech.inertia *= factor(spread.inertia);
    p.mech.k1 *= factor(spread.k1);
    p.mech.k2 *= factor(spread.k2);
    p.mech.k3 *= factor(spread.k3);
    p.mech.damping *= factor(spread.damping);
    p.resistance *= factor(spread.resistance);
    for _ in 0..10_000 {
        let g = &nominal.geometry;
        let candidate = relay::Geometry {
            theta_max: g.theta_max * factor(spread.theta_max),
            theta_nc: g.theta_nc * factor(spread.theta_nc),
            theta_no: g.theta_no * factor(spread.theta_no),
        };
        if candidate.validate().is_ok() {
            p.geometry = candidate;
            return Ok(p);
        }
    }
    Err(Error::InvalidParameter("geometry spread too wide to keep the stage ordering".into()))
}
