//! Flatness-based feedforward: desired flux, current and voltage from the
//! desired armature trajectory.
//!
//! The flux reference depends only on the adapted vector `p` and the fixed
//! geometry. The current reference additionally needs the core and
//! zero-gap constants, and the voltage reference the resistance estimate.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::relay::{self, Geometry, MagneticParams, ParamVector, RelayParams};
use crate::trajectory::{RefPoint, TrajectorySpec};

/// Constants needed by the current reference but absent from `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendedParams {
    pub g_c0: f64,
    pub lambda_sat: f64,
    pub g_g0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedforwardConfig {
    pub p: ParamVector,
    pub geometry: Geometry,
    pub extended: ExtendedParams,
    /// Resistance used by the voltage reference (Ω).
    pub resistance_estimate: f64,
    /// Value substituted for a negative radicand (Wb²).
    pub radicand_floor: f64,
}

impl FeedforwardConfig {
    /// Model configuration taken from a full parameter set.
    pub fn from_params(params: &RelayParams) -> Self {
        Self {
            p: params.param_vector(),
            geometry: params.geometry,
            extended: ExtendedParams {
                g_c0: params.magnetic.g_c0,
                lambda_sat: params.magnetic.lambda_sat,
                g_g0: params.magnetic.g_g0,
            },
            resistance_estimate: params.resistance,
            radicand_floor: 0.0,
        }
    }

    pub fn with_p(mut self, p: ParamVector) -> Self {
        self.p = p;
        self
    }

    pub fn magnetic(&self) -> MagneticParams {
        MagneticParams {
            g_c0: self.extended.g_c0,
            lambda_sat: self.extended.lambda_sat,
            g_g0: self.extended.g_g0,
            g_g0_slope: self.p.g_g0_slope(),
            kappa1: self.p.kappa1(),
            kappa2: self.p.kappa2(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxRef {
    pub lambda: f64,
    /// Set when the demanded deceleration exceeds what the elastic torque can
    /// provide, i.e. the radicand was negative.
    pub clamped: bool,
}

/// `λ_d = sqrt(2·(Γ_e(θ_d) − c·θ̇_d − J·θ̈_d) / G'_g(θ_d))`.
pub fn flux_reference(r: &RefPoint, cfg: &FeedforwardConfig) -> Result<FluxRef> {
    let p = &cfg.p;
    let mech = p.mech();
    let grad = relay::gap_gradient(r.pos, p.g_g0_slope(), p.kappa1(), p.kappa2())?;
    let torque = relay::elastic_torque(r.pos, &mech, &cfg.geometry) - mech.damping * r.vel - mech.inertia * r.acc;
    let radicand = 2.0 * torque / grad;
    if radicand < 0.0 {
        Ok(FluxRef { lambda: cfg.radicand_floor.sqrt(), clamped: true })
    } else {
        Ok(FluxRef { lambda: radicand.sqrt(), clamped: false })
    }
}

/// `i_d = (ĝ_c(λ_d) + ĝ_g(θ_d))·λ_d`.
pub fn current_reference(r: &RefPoint, cfg: &FeedforwardConfig) -> Result<f64> {
    let lambda = flux_reference(r, cfg)?.lambda;
    relay::coil_current(r.pos, lambda, &cfg.magnetic())
}

/// `v_d = dλ_d/dt + R̂·i_d`, the flux derivative taken by a symmetric
/// difference of [`flux_reference`] over `±dt_diff`.
pub fn voltage_reference(traj: &TrajectorySpec, t: f64, cfg: &FeedforwardConfig, dt_diff: f64) -> Result<f64> {
    let ahead = flux_reference(&traj.eval(t + dt_diff), cfg)?.lambda;
    let behind = flux_reference(&traj.eval(t - dt_diff), cfg)?.lambda;
    let dlambda = (ahead - behind) / (2.0 * dt_diff);
    Ok(dlambda + cfg.resistance_estimate * current_reference(&traj.eval(t), cfg)?)
}
