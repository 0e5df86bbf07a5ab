//! Desired armature trajectory: two rest-to-rest quintic segments joined at
//! the contact instant.
//!
//! Each segment is stored in normalized time `s = (t − t_start)/(t_end − t_start)`
//! so that the coefficients stay well conditioned for millisecond intervals.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::relay::Geometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// Closing: the coil is energized and θ goes from θ_max to 0.
    Making,
    /// Opening: θ goes from 0 back to θ_max.
    Breaking,
}

/// Position, velocity and acceleration of the reference at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefPoint {
    pub pos: f64,
    pub vel: f64,
    pub acc: f64,
}

impl RefPoint {
    pub fn at_rest(pos: f64) -> Self {
        Self { pos, vel: 0.0, acc: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub t0: f64,
    pub tc: f64,
    pub tf: f64,
    pub theta0: f64,
    pub thetac: f64,
    pub thetaf: f64,
    pub direction: Direction,
}

impl BoundarySpec {
    /// Boundary instants with the positions implied by `direction`:
    /// `(θ_max, θ_NO, 0)` when making and `(0, θ_NC, θ_max)` when breaking.
    pub fn new(direction: Direction, geo: &Geometry, t0: f64, tc: f64, tf: f64) -> Result<Self> {
        let (theta0, thetac, thetaf) = match direction {
            Direction::Making => (geo.theta_max, geo.theta_no, 0.0),
            Direction::Breaking => (0.0, geo.theta_nc, geo.theta_max),
        };
        let spec = Self { t0, tc, tf, theta0, thetac, thetaf, direction };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 < self.tc) {
            return Err(Error::DegenerateInterval { start: self.t0, end: self.tc });
        }
        if !(self.tc < self.tf) {
            return Err(Error::DegenerateInterval { start: self.tc, end: self.tf });
        }
        Ok(())
    }
}

/// Rest-to-rest quintic over `[t_start, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quintic {
    pub t_start: f64,
    pub t_end: f64,
    /// Coefficients of `1, s, …, s⁵` in normalized time.
    pub coeffs: [f64; 6],
}

impl Quintic {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Value and first two time derivatives at absolute time `t` (no clamping).
    pub fn eval(&self, t: f64) -> RefPoint {
        let h = self.duration();
        let s = (t - self.t_start) / h;
        let c = &self.coeffs;
        let pos = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))));
        let ds = c[1] + s * (2.0 * c[2] + s * (3.0 * c[3] + s * (4.0 * c[4] + s * 5.0 * c[5])));
        let dds = 2.0 * c[2] + s * (6.0 * c[3] + s * (12.0 * c[4] + s * 20.0 * c[5]));
        RefPoint { pos, vel: ds / h, acc: dds / (h * h) }
    }
}

/// Unique quintic with the given end positions and zero velocity and
/// acceleration at both ends: `p0 + Δ·(10s³ − 15s⁴ + 6s⁵)`.
pub fn solve_quintic(t_start: f64, t_end: f64, pos_start: f64, pos_end: f64) -> Result<Quintic> {
    if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
        return Err(Error::DegenerateInterval { start: t_start, end: t_end });
    }
    let d = pos_end - pos_start;
    Ok(Quintic {
        t_start,
        t_end,
        coeffs: [pos_start, 0.0, 0.0, 10.0 * d, -15.0 * d, 6.0 * d],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub segment1: Quintic,
    pub segment2: Quintic,
    pub boundary: BoundarySpec,
}

pub fn make_reference(boundary: BoundarySpec) -> Result<TrajectorySpec> {
    boundary.validate()?;
    let b = &boundary;
    Ok(TrajectorySpec {
        segment1: solve_quintic(b.t0, b.tc, b.theta0, b.thetac)?,
        segment2: solve_quintic(b.tc, b.tf, b.thetac, b.thetaf)?,
        boundary,
    })
}

/// Reference at time `t`. Before `t0` and after `tf` the nearest endpoint is
/// held with zero derivatives.
pub fn eval_reference(traj: &TrajectorySpec, t: f64) -> RefPoint {
    let b = &traj.boundary;
    if t <= b.t0 {
        RefPoint::at_rest(b.theta0)
    } else if t >= b.tf {
        RefPoint::at_rest(b.thetaf)
    } else if t < b.tc {
        bounded(traj.segment1.eval(t), b.theta0, b.thetac)
    } else {
        bounded(traj.segment2.eval(t), b.thetac, b.thetaf)
    }
}

// a rest-to-rest quintic never leaves its end positions; this only removes
// rounding that would otherwise put θ_d a few ulps below zero
fn bounded(mut r: RefPoint, a: f64, b: f64) -> RefPoint {
    r.pos = r.pos.clamp(a.min(b), a.max(b));
    r
}

impl TrajectorySpec {
    pub fn eval(&self, t: f64) -> RefPoint {
        eval_reference(self, t)
    }

    /// CSV with columns `t,theta_d,dtheta_d,ddtheta_d` sampled every `dt`
    /// over `[t_start, t_end]`.
    pub fn write_csv<W: Write>(&self, out: W, t_start: f64, t_end: f64, dt: f64) -> Result<()> {
        if !(dt > 0.0) || !(t_end > t_start) {
            return Err(Error::DegenerateInterval { start: t_start, end: t_end });
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "theta_d", "dtheta_d", "ddtheta_d"])?;
        let n = ((t_end - t_start) / dt).round() as usize;
        for k in 0..=n {
            let t = t_start + k as f64 * dt;
            let r = self.eval(t);
            w.write_record([t.to_string(), r.pos.to_string(), r.vel.to_string(), r.acc.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relay::RelayParams;

    /// Independent oracle: Gaussian elimination on the raw 6×6 boundary system.
    fn solve_boundary_system(t0: f64, t1: f64, p0: f64, p1: f64) -> [f64; 6] {
        let mut a = [[0.0f64; 7]; 6];
        for (row, &t) in [t0, t1].iter().enumerate() {
            for k in 0..6 {
                a[row * 3][k] = t.powi(k as i32);
                a[row * 3 + 1][k] = if k >= 1 { k as f64 * t.powi(k as i32 - 1) } else { 0.0 };
                a[row * 3 + 2][k] = if k >= 2 { (k * (k - 1)) as f64 * t.powi(k as i32 - 2) } else { 0.0 };
            }
        }
        a[0][6] = p0;
        a[3][6] = p1;
        for col in 0..6 {
            let piv = (col..6).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, piv);
            for r in 0..6 {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..7 {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        std::array::from_fn(|i| a[i][6] / a[i][i])
    }

    #[test]
    fn unit_smoothstep_matches_linear_solve() {
        let q = solve_quintic(0.0, 1.0, 0.0, 1.0).unwrap();
        let oracle = solve_boundary_system(0.0, 1.0, 0.0, 1.0);
        for (c, o) in q.coeffs.iter().zip(oracle) {
            assert!((c - o).abs() < 1e-12, "{:?} vs {:?}", q.coeffs, oracle);
        }
        assert_eq!(q.coeffs, [0.0, 0.0, 0.0, 10.0, -15.0, 6.0]);
    }

    #[test]
    fn zero_displacement_is_constant() {
        let q = solve_quintic(1e-3, 2e-3, 0.5, 0.5).unwrap();
        assert_eq!(q.coeffs, [0.5, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(solve_quintic(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(solve_quintic(1.0, 0.5, 0.0, 1.0).is_err());
    }

    #[test]
    fn boundary_residuals() {
        for &(t0, t1, p0, p1) in &[(0.0, 6.5e-3, 0.02, 0.004), (6.5e-3, 8e-3, 0.004, 0.0), (1.0, 3.0, -2.0, 5.0)] {
            let q = solve_quintic(t0, t1, p0, p1).unwrap();
            let tol = 1e-12 * (p1 - p0).abs();
            let a = q.eval(t0);
            let b = q.eval(t1);
            assert!((a.pos - p0).abs() < tol && (b.pos - p1).abs() < tol);
            let h = t1 - t0;
            assert!(a.vel.abs() * h < tol && b.vel.abs() * h < tol);
            assert!(a.acc.abs() * h * h < tol && b.acc.abs() * h * h < tol);
        }
    }

    #[test]
    fn midpoint_matches_raw_polynomial() {
        let (t0, t1, p0, p1) = (0.0, 6.5e-3, 0.02, 0.004);
        let q = solve_quintic(t0, t1, p0, p1).unwrap();
        // raw-time coefficients from the normalized form, evaluated directly
        let t = 2.1e-3;
        let s = (t - t0) / (t1 - t0);
        let d = p1 - p0;
        let expect = p0 + d * (10.0 * s.powi(3) - 15.0 * s.powi(4) + 6.0 * s.powi(5));
        let vexpect = d * (30.0 * s.powi(2) - 60.0 * s.powi(3) + 30.0 * s.powi(4)) / (t1 - t0);
        let r = q.eval(t);
        assert!((r.pos - expect).abs() < 1e-15);
        assert!((r.vel - vexpect).abs() < 1e-12 * vexpect.abs());
    }

    #[test]
    fn making_reference_hits_contact_point() {
        let geo = RelayParams::default().geometry;
        let b = BoundarySpec::new(Direction::Making, &geo, 0.0, 6.5e-3, 8e-3).unwrap();
        let traj = make_reference(b).unwrap();
        let c = traj.eval(6.5e-3);
        assert!((c.pos - geo.theta_no).abs() < 1e-15);
        assert!(c.vel.abs() < 1e-12 && c.acc.abs() < 1e-9);
        assert_eq!(traj.eval(0.0), RefPoint::at_rest(geo.theta_max));
        assert_eq!(traj.eval(9e-3), RefPoint::at_rest(0.0));
        assert_eq!(traj.eval(-1.0), RefPoint::at_rest(geo.theta_max));
        let end = traj.segment2.eval(8e-3);
        assert!(end.pos.abs() < 1e-15);
    }

    #[test]
    fn breaking_mirrors_making() {
        // symmetric geometry so that the breaking contact point mirrors the making one
        let geo = Geometry { theta_max: 0.02, theta_nc: 0.014, theta_no: 0.006 };
        let mk = make_reference(BoundarySpec::new(Direction::Making, &geo, 0.0, 5e-3, 8e-3).unwrap()).unwrap();
        let br = make_reference(BoundarySpec::new(Direction::Breaking, &geo, 0.0, 5e-3, 8e-3).unwrap()).unwrap();
        for k in 0..=400 {
            let t = 8e-3 * k as f64 / 400.0;
            let a = mk.eval(t);
            let b = br.eval(t);
            assert!((a.pos - (geo.theta_max - b.pos)).abs() < 1e-15);
            assert!((a.vel + b.vel).abs() < 1e-10);
        }
    }

    #[test]
    fn making_is_monotone() {
        let geo = RelayParams::default().geometry;
        let traj = make_reference(BoundarySpec::new(Direction::Making, &geo, 0.0, 6.5e-3, 8e-3).unwrap()).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..=10_000 {
            let r = traj.eval(8e-3 * k as f64 / 10_000.0);
            assert!(r.pos <= last + 1e-18);
            assert!(r.vel <= 1e-12);
            last = r.pos;
        }
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let geo = RelayParams::default().geometry;
        let traj = make_reference(BoundarySpec::new(Direction::Making, &geo, 0.0, 6.5e-3, 8e-3).unwrap()).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf, 0.0, 8e-3, 1e-3).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = s.lines().collect();
        assert_eq!(lines[0], "t,theta_d,dtheta_d,ddtheta_d");
        assert_eq!(lines.len(), 10);
    }
}
