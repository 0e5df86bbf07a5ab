//! One complete relay operation: the discrete control stack running at the
//! control rate against the hybrid plant, followed by the synthetic
//! microphone and the acoustic cost.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedforward::{flux_reference, voltage_reference, FeedforwardConfig};
use crate::flux::{EstimatorRule, FluxEstimator, PiController, PiGains, VoltageLimits};
use crate::plant::{self, AudioRecord, Drive, EnergyAudit, ImpactEvent, PlantState, SimConfig, Simulator, Stage};
use crate::r2r::{cost_from_audio, CostConfig};
use crate::relay::{ParamVector, RelayParams};
use crate::trajectory::{make_reference, BoundarySpec, Direction, TrajectorySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlMode {
    /// Square voltage: supply voltage for making, zero for breaking.
    Standard,
    /// Flux feedforward tracked by the PI loop on the estimated flux.
    FluxTracking,
    /// Open-loop voltage feedforward.
    VoltageFeedforward,
    /// Flux imposed exactly equal to the reference (no electrical dynamics).
    IdealTracking,
}

impl ControlMode {
    pub fn is_controlled(self) -> bool {
        self != ControlMode::Standard
    }
}

/// Trajectory instants, relative to the start of the operation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Timing {
    pub t0: f64,
    pub tc: f64,
    pub tf: f64,
    /// Time after `tf` at which a making operation hands over to the plain
    /// supply voltage to hold the relay closed.
    pub handover_delay: f64,
}

impl Default for Timing {
    fn default() -> Self {
        Self { t0: 0.0, tc: 6.5e-3, tf: 8e-3, handover_delay: 1e-3 }
    }
}

/// Everything the controller needs for one operation.
#[derive(Debug, Clone)]
pub struct ControlStack {
    pub mode: ControlMode,
    pub trajectory: TrajectorySpec,
    pub feedforward: FeedforwardConfig,
    pub gains: PiGains,
    pub limits: VoltageLimits,
    pub estimator: EstimatorRule,
    pub timing: Timing,
}

impl ControlStack {
    /// Stack whose model is `model` with the adapted vector `p` and the
    /// resistance estimate `r_hat`.
    pub fn new(
        mode: ControlMode,
        direction: Direction,
        model: &RelayParams,
        p: ParamVector,
        r_hat: f64,
        timing: Timing,
    ) -> Result<Self> {
        let boundary = BoundarySpec::new(direction, &model.geometry, timing.t0, timing.tc, timing.tf)?;
        let feedforward = FeedforwardConfig { resistance_estimate: r_hat, ..FeedforwardConfig::from_params(model) }.with_p(p);
        Ok(Self {
            mode,
            trajectory: make_reference(boundary)?,
            feedforward,
            gains: PiGains::default(),
            limits: VoltageLimits::default(),
            estimator: EstimatorRule::Trapezoidal,
            timing,
        })
    }

    pub fn direction(&self) -> Direction {
        self.trajectory.boundary.direction
    }
}

/// One control-rate sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub u: f64,
    pub current: f64,
    pub lambda: f64,
    pub lambda_hat: f64,
    pub lambda_d: f64,
    pub theta: f64,
    pub omega: f64,
    pub stage: Stage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationRecord {
    pub operation_index: usize,
    pub direction: Direction,
    pub mode: ControlMode,
    pub resistance_true: f64,
    pub r_hat: f64,
    pub samples: Vec<Sample>,
    pub events: Vec<ImpactEvent>,
    pub audio: AudioRecord,
    pub cost: f64,
    /// Control periods in which the flux reference was clamped.
    pub clamped_samples: usize,
    /// Control periods in which the voltage command hit a limit.
    pub saturated_samples: usize,
    pub energy: EnergyAudit,
}

impl OperationRecord {
    fn empty(stack: &ControlStack, plant: &RelayParams, index: usize, fs: f64) -> Self {
        Self {
            operation_index: index,
            direction: stack.direction(),
            mode: stack.mode,
            resistance_true: plant.resistance,
            r_hat: stack.feedforward.resistance_estimate,
            samples: Vec::new(),
            events: Vec::new(),
            audio: AudioRecord { sample_rate: fs, start_time: 0.0, samples: Vec::new() },
            cost: 0.0,
            clamped_samples: 0,
            saturated_samples: 0,
            energy: EnergyAudit::default(),
        }
    }

    /// Speed of the first impact on the stop the operation drives toward.
    pub fn landing_speed(&self) -> Option<f64> {
        let target = match self.direction {
            Direction::Making => plant::ImpactKind::ArmatureStopLow,
            Direction::Breaking => plant::ImpactKind::ArmatureStopHigh,
        };
        self.events.iter().find(|e| e.kind == target).map(|e| e.impact_speed)
    }

    pub fn final_state(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

/// A failed operation together with everything recorded before the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationFailure {
    pub error: Error,
    pub partial: Box<OperationRecord>,
}

impl std::fmt::Display for OperationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "operation {} failed: {}", self.partial.operation_index, self.error)
    }
}

impl std::error::Error for OperationFailure {}

fn initial_state(direction: Direction, plant: &RelayParams, cfg: &SimConfig) -> Result<PlantState> {
    match direction {
        Direction::Making => Ok(PlantState::rest(plant)),
        Direction::Breaking => PlantState::closed(plant, cfg.supply_voltage),
    }
}

/// Run one operation of `stack` on the unit `plant`.
pub fn run_operation<R: Rng + ?Sized>(
    stack: &ControlStack,
    plant: &RelayParams,
    cfg: &SimConfig,
    cost: &CostConfig,
    index: usize,
    rng: &mut R,
) -> std::result::Result<OperationRecord, Box<OperationFailure>> {
    let mut record = OperationRecord::empty(stack, plant, index, cfg.audio.sample_rate);
    match simulate(stack, plant, cfg, cost, rng, &mut record) {
        Ok(()) => Ok(record),
        Err(error) => Err(Box::new(OperationFailure { error, partial: Box::new(record) })),
    }
}

fn simulate<R: Rng + ?Sized>(
    stack: &ControlStack,
    plant: &RelayParams,
    cfg: &SimConfig,
    cost: &CostConfig,
    rng: &mut R,
    record: &mut OperationRecord,
) -> Result<()> {
    cfg.validate()?;
    plant.validate()?;
    let direction = stack.direction();
    let mut sim = Simulator::new(*plant, *cfg, initial_state(direction, plant, cfg)?);
    let dt = cfg.control_period;
    let n = (cfg.duration / dt).round() as usize;
    let handover = stack.timing.tf + stack.timing.handover_delay;
    let m_ff = stack.feedforward;

    let noise = |sigma: f64, rng: &mut R| -> f64 {
        if sigma > 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            sigma * z
        } else {
            0.0
        }
    };

    let mut est = FluxEstimator::new(m_ff.resistance_estimate, stack.estimator);
    let i0 = sim.coil_current()? + noise(cfg.measurement.current_sigma, rng);
    // a closed relay starts from the hold flux it was driven to
    est.reset(sim.state.lambda, i0);
    let mut pi = PiController::new(stack.gains, stack.limits);
    let mut last_u = 0.0;
    let ideal_flux = |t: f64| {
        flux_reference(&stack.trajectory.eval(t), &m_ff).map(|f| f.lambda).unwrap_or(f64::NAN)
    };

    for k in 0..=n {
        let t = k as f64 * dt;
        let current = sim.coil_current()? + noise(cfg.measurement.current_sigma, rng);
        if k > 0 {
            let v_meas = last_u + noise(cfg.measurement.voltage_sigma, rng);
            est.step(v_meas, current, dt);
        }
        let reference = flux_reference(&stack.trajectory.eval(t), &m_ff)?;
        let controlled = match stack.mode {
            ControlMode::Standard => false,
            ControlMode::IdealTracking => true,
            _ => !(direction == Direction::Making && t >= handover),
        };
        let after_handover = match direction {
            Direction::Making => cfg.supply_voltage,
            Direction::Breaking => 0.0,
        };
        if controlled && reference.clamped {
            record.clamped_samples += 1;
        }
        let u = if !controlled {
            after_handover
        } else {
            match stack.mode {
                ControlMode::FluxTracking => {
                    let u = pi.step(reference.lambda, est.lambda_hat, dt);
                    if pi.state.saturated {
                        record.saturated_samples += 1;
                    }
                    u
                }
                ControlMode::VoltageFeedforward => {
                    let v = voltage_reference(&stack.trajectory, t, &m_ff, dt)?;
                    if !stack.limits.contains(v) {
                        record.saturated_samples += 1;
                    }
                    stack.limits.clamp(v)
                }
                ControlMode::IdealTracking => f64::NAN,
                ControlMode::Standard => unreachable!(),
            }
        };
        record.samples.push(Sample {
            t,
            u,
            current,
            lambda: sim.state.lambda,
            lambda_hat: est.lambda_hat,
            lambda_d: reference.lambda,
            theta: sim.state.theta,
            omega: sim.state.omega,
            stage: sim.state.stage,
        });
        if k == n {
            break;
        }
        let drive = if controlled && stack.mode == ControlMode::IdealTracking {
            Drive::Flux(&ideal_flux)
        } else {
            Drive::Voltage(u)
        };
        let lambda_before = sim.state.lambda;
        let result = sim.advance(drive, dt);
        record.events.clone_from(&sim.events);
        record.energy = sim.energy;
        result?;
        last_u = if u.is_nan() {
            // voltage that would have produced the imposed flux change
            let u_eff = (sim.state.lambda - lambda_before) / dt + plant.resistance * sim.coil_current()?;
            record.samples.last_mut().expect("pushed above").u = u_eff;
            u_eff
        } else {
            u
        };
    }

    record.audio = plant::synth_audio(&sim.events, 0.0, cfg.duration, &cfg.audio, rng);
    record.cost = cost_from_audio(&record.audio, cost)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(mode: ControlMode, direction: Direction) -> OperationRecord {
        let params = RelayParams::default();
        let stack =
            ControlStack::new(mode, direction, &params, params.param_vector(), params.resistance, Timing::default())
                .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        run_operation(&stack, &params, &SimConfig::default(), &CostConfig::default(), 1, &mut rng).unwrap()
    }

    #[test]
    fn standard_making_hits_the_core() {
        let rec = run(ControlMode::Standard, Direction::Making);
        assert!(rec.events.iter().any(|e| e.kind == plant::ImpactKind::ArmatureStopLow));
        assert_eq!(rec.samples.len(), 1501);
        assert!(rec.cost > 0.0);
        assert!(rec.final_state().unwrap().theta < 1e-9);
    }

    #[test]
    fn standard_breaking_returns_to_rest() {
        let rec = run(ControlMode::Standard, Direction::Breaking);
        assert!(rec.events.iter().any(|e| e.kind == plant::ImpactKind::ArmatureStopHigh));
        let last = rec.final_state().unwrap();
        let geo = RelayParams::default().geometry;
        assert!((last.theta - geo.theta_max).abs() < 1e-3 * geo.theta_max);
    }

    #[test]
    fn ideal_tracking_lands_softly() {
        let hard = run(ControlMode::Standard, Direction::Making).landing_speed().unwrap();
        let soft = run(ControlMode::IdealTracking, Direction::Making);
        let v = soft.landing_speed().unwrap_or(0.0);
        assert!(v < 0.02 * hard, "{v} vs {hard}");
    }

    #[test]
    fn energy_audit_balances() {
        for mode in [ControlMode::Standard, ControlMode::FluxTracking] {
            let rec = run(mode, Direction::Making);
            assert!(rec.energy.relative_residual() < 1e-6, "{mode:?}: {:?}", rec.energy);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        assert_eq!(run(ControlMode::FluxTracking, Direction::Making), run(ControlMode::FluxTracking, Direction::Making));
    }
}
