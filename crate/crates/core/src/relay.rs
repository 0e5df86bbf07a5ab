//! Constitutive model of the relay: scaled reluctances, torques and the
//! state derivatives of the electromagnetic and mechanical subsystems.
//!
//! Reluctances are scaled by the squared turn count, so they carry units of
//! inverse inductance (1/H) and the coil current is simply `i = g(θ, λ)·λ`.
//!
//! The mechanical equation uses the dissipative convention
//! `J·θ̈ = Γ_mag + Γ_e − c·ω` with `c > 0`; the flatness feedforward inverts
//! exactly this form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this angle the gap reluctance is evaluated through its analytic
/// limit, avoiding `0·ln(κ2/0)`.
pub const THETA_LIMIT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticParams {
    /// Core reluctance scale ĝ_c0 (1/H).
    pub g_c0: f64,
    /// Saturation flux linkage (Wb).
    pub lambda_sat: f64,
    /// Gap reluctance at zero gap ĝ_g0 (1/H).
    pub g_g0: f64,
    /// Gap reluctance slope ĝ'_g0 (1/(H·rad)).
    pub g_g0_slope: f64,
    /// Fringing shape constant κ1 (1/rad).
    pub kappa1: f64,
    /// Fringing shape constant κ2 (rad).
    pub kappa2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechParams {
    /// Armature moment of inertia (kg·m²).
    pub inertia: f64,
    /// Return spring stiffness (N·m/rad).
    pub k1: f64,
    /// Moving-contact stiffness while pushed by the plastic part (N·m/rad).
    pub k2: f64,
    /// Residual contact stiffness once the NO contact is reached (N·m/rad).
    pub k3: f64,
    /// Viscous damping (N·m·s/rad).
    pub damping: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Rest position of the armature (rad).
    pub theta_max: f64,
    /// Position where the plastic part meets the moving contact (rad).
    pub theta_nc: f64,
    /// Position where the moving contact reaches the NO terminal (rad).
    pub theta_no: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayParams {
    pub magnetic: MagneticParams,
    pub mech: MechParams,
    pub geometry: Geometry,
    /// Coil resistance (Ω).
    pub resistance: f64,
}

/// The adapted parameter subset used by the feedforward controller, in the
/// fixed order `[J, k1, k2, k3, c, ĝ'_g0, κ1, κ2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamVector(pub [f64; 8]);

impl ParamVector {
    pub const LEN: usize = 8;
    pub const NAMES: [&'static str; 8] =
        ["inertia", "k1", "k2", "k3", "damping", "g_g0_slope", "kappa1", "kappa2"];

    pub fn new(entries: [f64; 8]) -> Result<Self> {
        for (name, v) in Self::NAMES.iter().zip(entries) {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self(entries))
    }

    pub fn entries(&self) -> &[f64; 8] {
        &self.0
    }

    pub fn mech(&self) -> MechParams {
        let [inertia, k1, k2, k3, damping, ..] = self.0;
        MechParams { inertia, k1, k2, k3, damping }
    }

    pub fn g_g0_slope(&self) -> f64 {
        self.0[5]
    }

    pub fn kappa1(&self) -> f64 {
        self.0[6]
    }

    pub fn kappa2(&self) -> f64 {
        self.0[7]
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} = {v} must be positive")))
    }
}

impl MagneticParams {
    pub fn validate(&self) -> Result<()> {
        positive("g_c0", self.g_c0)?;
        positive("lambda_sat", self.lambda_sat)?;
        positive("g_g0", self.g_g0)?;
        positive("g_g0_slope", self.g_g0_slope)?;
        positive("kappa1", self.kappa1)?;
        positive("kappa2", self.kappa2)
    }
}

impl MechParams {
    pub fn validate(&self) -> Result<()> {
        positive("inertia", self.inertia)?;
        positive("k1", self.k1)?;
        positive("k2", self.k2)?;
        positive("k3", self.k3)?;
        positive("damping", self.damping)
    }
}

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        if 0.0 < self.theta_no && self.theta_no < self.theta_nc && self.theta_nc < self.theta_max {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "geometry must satisfy 0 < theta_no < theta_nc < theta_max, got {:?}",
                self
            )))
        }
    }

    pub fn stroke(&self) -> f64 {
        self.theta_max
    }
}

impl RelayParams {
    pub fn validate(&self) -> Result<()> {
        self.magnetic.validate()?;
        self.mech.validate()?;
        self.geometry.validate()?;
        positive("resistance", self.resistance)
    }

    pub fn param_vector(&self) -> ParamVector {
        let m = &self.mech;
        let g = &self.magnetic;
        ParamVector([
            m.inertia,
            m.k1,
            m.k2,
            m.k3,
            m.damping,
            g.g_g0_slope,
            g.kappa1,
            g.kappa2,
        ])
    }

    pub fn with_param_vector(mut self, p: &ParamVector) -> Self {
        self.mech = p.mech();
        self.magnetic.g_g0_slope = p.g_g0_slope();
        self.magnetic.kappa1 = p.kappa1();
        self.magnetic.kappa2 = p.kappa2();
        self
    }
}

impl Default for RelayParams {
    /// Nominal unit used throughout the workbench. These are plausible
    /// magnitudes for a small signal relay with a 24 V coil, not identified
    /// values of any physical device.
    fn default() -> Self {
        Self {
            magnetic: MagneticParams {
                g_c0: 0.1,
                lambda_sat: 0.2,
                g_g0: 0.05,
                g_g0_slope: 6.0,
                kappa1: 10.0,
                kappa2: 0.1,
            },
            mech: MechParams {
                inertia: 1e-7,
                k1: 0.1,
                k2: 0.4,
                k3: 0.6,
                damping: 5e-5,
            },
            geometry: Geometry {
                theta_max: 0.02,
                theta_nc: 0.013,
                theta_no: 0.004,
            },
            resistance: 1500.0,
        }
    }
}

/// Scaled core reluctance `ĝ_c0 / (1 − |λ|/λ_sat)`.
pub fn core_reluctance(lambda: f64, m: &MagneticParams) -> Result<f64> {
    let ratio = lambda.abs() / m.lambda_sat;
    if !(ratio < 1.0) {
        return Err(Error::Saturation { lambda, lambda_sat: m.lambda_sat });
    }
    Ok(m.g_c0 / (1.0 - ratio))
}

fn fringing_denominator(theta: f64, kappa1: f64, kappa2: f64) -> Result<f64> {
    if theta < 0.0 || theta.is_nan() {
        return Err(Error::GapDomain { theta, denominator: f64::NAN });
    }
    let d = 1.0 + kappa1 * theta * (kappa2 / theta).ln();
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::GapDomain { theta, denominator: d })
    }
}

/// Scaled gap reluctance `ĝ_g0 + ĝ'_g0·θ / (1 + κ1·θ·ln(κ2/θ))`.
pub fn gap_reluctance(theta: f64, m: &MagneticParams) -> Result<f64> {
    if (0.0..THETA_LIMIT).contains(&theta) {
        return Ok(m.g_g0);
    }
    let d = fringing_denominator(theta, m.kappa1, m.kappa2)?;
    Ok(m.g_g0 + m.g_g0_slope * theta / d)
}

/// Analytic derivative of [`gap_reluctance`] with respect to θ.
pub fn gap_reluctance_grad(theta: f64, m: &MagneticParams) -> Result<f64> {
    gap_gradient(theta, m.g_g0_slope, m.kappa1, m.kappa2)
}

/// Same as [`gap_reluctance_grad`] but taking the three constants directly;
/// the feedforward evaluates it from the adapted vector.
pub(crate) fn gap_gradient(theta: f64, slope: f64, kappa1: f64, kappa2: f64) -> Result<f64> {
    if (0.0..THETA_LIMIT).contains(&theta) {
        return Ok(slope);
    }
    let d = fringing_denominator(theta, kappa1, kappa2)?;
    Ok(slope * (1.0 + kappa1 * theta) / (d * d))
}

/// Magnetic torque `−G'_g(θ)·λ²/2`; never positive.
pub fn magnetic_torque(theta: f64, lambda: f64, m: &MagneticParams) -> Result<f64> {
    Ok(-0.5 * gap_reluctance_grad(theta, m)? * lambda * lambda)
}

/// Piecewise-affine elastic torque of the three motion stages.
pub fn elastic_torque(theta: f64, mech: &MechParams, geo: &Geometry) -> f64 {
    let spring = mech.k1 * (geo.theta_max - theta);
    if theta > geo.theta_nc {
        spring
    } else if theta >= geo.theta_no {
        spring + mech.k2 * (geo.theta_nc - theta)
    } else {
        spring + mech.k2 * (geo.theta_nc - geo.theta_no) + mech.k3 * (geo.theta_no - theta)
    }
}

/// Potential energy stored in the elastic elements, zero at `θ_max`, so that
/// `elastic_torque = −d(elastic_energy)/dθ`.
pub fn elastic_energy(theta: f64, mech: &MechParams, geo: &Geometry) -> f64 {
    let d1 = geo.theta_max - theta;
    let spring = 0.5 * mech.k1 * d1 * d1;
    if theta > geo.theta_nc {
        spring
    } else if theta >= geo.theta_no {
        let d2 = geo.theta_nc - theta;
        spring + 0.5 * mech.k2 * d2 * d2
    } else {
        let span = geo.theta_nc - geo.theta_no;
        let d3 = geo.theta_no - theta;
        spring + 0.5 * mech.k2 * (span * span + 2.0 * span * d3) + 0.5 * mech.k3 * d3 * d3
    }
}

/// Coil current `(ĝ_c(λ) + ĝ_g(θ))·λ`.
pub fn coil_current(theta: f64, lambda: f64, m: &MagneticParams) -> Result<f64> {
    Ok((core_reluctance(lambda, m)? + gap_reluctance(theta, m)?) * lambda)
}

/// `dλ/dt = u − R·i(θ, λ)`.
pub fn flux_derivative(theta: f64, lambda: f64, u: f64, resistance: f64, m: &MagneticParams) -> Result<f64> {
    Ok(u - resistance * coil_current(theta, lambda, m)?)
}

/// `(dθ/dt, dω/dt)` of the armature.
pub fn mech_derivatives(
    theta: f64,
    omega: f64,
    lambda: f64,
    mech: &MechParams,
    geo: &Geometry,
    m: &MagneticParams,
) -> Result<(f64, f64)> {
    let torque = magnetic_torque(theta, lambda, m)? + elastic_torque(theta, mech, geo) - mech.damping * omega;
    Ok((omega, torque / mech.inertia))
}
