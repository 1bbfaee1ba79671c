//! Navigation-frame model (East-North-Up) and propagation of the frame rotation
//! `C_{n(t)}^{n(0)}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{exp_so3, orthonormalize, Mat3, Vec3};

pub const EARTH_RATE: f64 = 7.2921150e-5;
pub const STANDARD_GRAVITY: f64 = 9.80665;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthParams {
    /// rad/s
    pub earth_rate: f64,
    /// m/s^2
    pub gravity_mag: f64,
    /// rad
    pub latitude: f64,
}

impl Default for EarthParams {
    fn default() -> Self {
        Self {
            earth_rate: EARTH_RATE,
            gravity_mag: STANDARD_GRAVITY,
            latitude: 0.0,
        }
    }
}

impl EarthParams {
    pub fn at_latitude(latitude: f64) -> Self {
        Self {
            latitude,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.latitude.abs() <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidConfig(format!(
                "latitude {} rad outside [-pi/2, pi/2]",
                self.latitude
            )));
        }
        if !(self.gravity_mag > 0.0) || !self.earth_rate.is_finite() {
            return Err(Error::InvalidConfig(
                "gravity must be positive and earth rate finite".into(),
            ));
        }
        Ok(())
    }
}

/// Earth rotation rate in ENU: `[0, W cos L, W sin L]`.
pub fn omega_ie_n(p: &EarthParams) -> Vec3 {
    let (s, c) = p.latitude.sin_cos();
    Vec3::new(0.0, p.earth_rate * c, p.earth_rate * s)
}

/// Gravity in ENU, pointing down.
pub fn gravity_n(p: &EarthParams) -> Vec3 {
    Vec3::new(0.0, 0.0, -p.gravity_mag)
}

/// `C_{n(t)}^{n(0)}` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NavRotation {
    pub c_n0_nt: Mat3,
    pub t: f64,
}

impl NavRotation {
    pub fn identity() -> Self {
        Self {
            c_n0_nt: Mat3::identity(),
            t: 0.0,
        }
    }
}

/// One step of `C_dot = C [w_in x]`, integrated with the exact exponential of `w_in * dt`.
pub fn propagate_nav(nr: &NavRotation, omega_in_n: &Vec3, dt: f64) -> Result<NavRotation> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    Ok(NavRotation {
        c_n0_nt: orthonormalize(&(nr.c_n0_nt * exp_so3(&(omega_in_n * dt)))),
        t: nr.t + dt,
    })
}

/// Nav rotations at `t = k * dt` for `k = 0..n`, for a constant `w_in` (static or rocking base).
pub fn nav_history(omega_in_n: &Vec3, dt: f64, n: usize) -> Result<Vec<NavRotation>> {
    let mut out = Vec::with_capacity(n);
    let mut cur = NavRotation::identity();
    for _ in 0..n {
        out.push(cur);
        cur = propagate_nav(&cur, omega_in_n, dt)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{orthonormality_error, rotation_angle};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn earth_rate_components() {
        let eq = omega_ie_n(&EarthParams::at_latitude(0.0));
        assert_eq!(eq, Vec3::new(0.0, EARTH_RATE, 0.0));
        let pole = omega_ie_n(&EarthParams::at_latitude(FRAC_PI_2));
        assert!((pole - Vec3::new(0.0, 0.0, EARTH_RATE)).norm() < 1e-20);
        // independent evaluation: W * sqrt(2)/2
        let mid = omega_ie_n(&EarthParams::at_latitude(45f64.to_radians()));
        let expected = 7.2921150e-5 * 0.5f64.sqrt();
        assert!((mid.y - expected).abs() < 1e-18);
        assert!((mid.z - expected).abs() < 1e-18);
    }

    #[test]
    fn gravity_convention() {
        let p = EarthParams::default();
        assert_eq!(gravity_n(&p), Vec3::new(0.0, 0.0, -9.80665));
        let p = EarthParams {
            gravity_mag: 9.78,
            ..p
        };
        assert_eq!(gravity_n(&p), Vec3::new(0.0, 0.0, -9.78));
        assert_eq!(gravity_n(&p).norm(), 9.78);
    }

    #[test]
    fn zero_rate_leaves_rotation() {
        let nr = NavRotation::identity();
        let out = propagate_nav(&nr, &Vec3::zeros(), 0.01).unwrap();
        assert_eq!(out.c_n0_nt, Mat3::identity());
        assert!(matches!(
            propagate_nav(&nr, &Vec3::zeros(), 0.0),
            Err(Error::NonPositiveDt(_))
        ));
    }

    #[test]
    fn single_step_about_up() {
        let out = propagate_nav(&NavRotation::identity(), &Vec3::new(0.0, 0.0, 1e-3), 1.0).unwrap();
        let (s, c) = 1e-3f64.sin_cos();
        let expected = Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        assert!((out.c_n0_nt - expected).norm() < 1e-15);
    }

    #[test]
    fn sidereal_day_closes() {
        let p = EarthParams::at_latitude(FRAC_PI_2);
        let w = omega_ie_n(&p);
        let day = 2.0 * std::f64::consts::PI / EARTH_RATE;
        let steps = 86_164usize;
        let dt = day / steps as f64;
        let mut nr = NavRotation::identity();
        let mut worst: f64 = 0.0;
        for _ in 0..steps {
            nr = propagate_nav(&nr, &w, dt).unwrap();
            worst = worst.max(orthonormality_error(&nr.c_n0_nt));
        }
        assert!(rotation_angle(&nr.c_n0_nt, &Mat3::identity()) < 1e-6);
        assert!(worst < 1e-9);
    }

    #[test]
    fn two_half_steps_equal_one_step() {
        let w = Vec3::new(1e-3, -2e-3, 5e-4);
        let a = propagate_nav(&NavRotation::identity(), &w, 0.5).unwrap();
        let a = propagate_nav(&a, &w, 0.5).unwrap();
        let b = propagate_nav(&NavRotation::identity(), &w, 1.0).unwrap();
        assert!((a.c_n0_nt - b.c_n0_nt).norm() < 1e-12);
    }
}
