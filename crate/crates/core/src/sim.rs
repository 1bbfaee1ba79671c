//! Synthetic truth and IMU measurements for static and rocking bases.
//!
//! The body rotates about a fixed point, so `v^n = 0` and `f^b = -C_n^b g^n`. Attitude follows
//! the Euler profile `e_i(t) = e_i(0) + A_i sin(2 pi f_i t + phi_i)`.
//!
//! IMU samples carry the mean rate and mean specific force over `[t_k, t_k + dt]`: the gyro
//! value is the rotation vector of `C_{b(t_k)}^{b(t_{k+1})}` divided by `dt` (so zero-order-hold
//! integration reproduces the attitude exactly), and the accelerometer value is the body-frame
//! velocity increment divided by `dt`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::earth::{omega_ie_n, EarthParams};
use crate::error::{Error, Result};
use crate::math::{dcm_to_quat, exp_so3, rot_x, rot_y, Euler, Mat3, Vec3};
use crate::vecobs::ImuSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    #[default]
    Static,
    Rocking,
}

/// Angles are radians, frequencies Hz, times seconds. Vectors of per-axis values are ordered
/// yaw, pitch, roll.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub initial_attitude: Euler,
    pub amplitudes: Vec3,
    pub frequencies: Vec3,
    pub phases: Vec3,
    pub earth: EarthParams,
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn static_base(latitude: f64, attitude: Euler, duration: f64, dt: f64) -> Self {
        Self {
            kind: ScenarioKind::Static,
            initial_attitude: attitude,
            amplitudes: Vec3::zeros(),
            frequencies: Vec3::zeros(),
            phases: Vec3::zeros(),
            earth: EarthParams::at_latitude(latitude),
            duration,
            dt,
            seed: 0,
        }
    }

    /// Moored-ship style rocking: 5/3/4 degrees at 0.1/0.15/0.2 Hz in yaw/pitch/roll.
    pub fn rocking_base(latitude: f64, attitude: Euler, duration: f64, dt: f64) -> Self {
        Self {
            kind: ScenarioKind::Rocking,
            amplitudes: Vec3::new(5.0, 3.0, 4.0).map(f64::to_radians),
            frequencies: Vec3::new(0.1, 0.15, 0.2),
            phases: Vec3::new(0.0, 0.7, 1.9),
            ..Self::static_base(latitude, attitude, duration, dt)
        }
    }

    pub fn sample_count(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::NonPositiveDt(self.dt));
        }
        if !(self.duration >= self.dt) {
            return Err(Error::InvalidConfig("duration shorter than one sample".into()));
        }
        self.earth.validate()?;
        if self.kind == ScenarioKind::Rocking {
            let nyquist = 0.5 / self.dt;
            if let Some(f) = self.frequencies.iter().find(|f| **f >= nyquist || **f < 0.0) {
                return Err(Error::AliasedProfile {
                    frequency: *f,
                    dt: self.dt,
                });
            }
        }
        Ok(())
    }

    /// Euler angles and their rates at `t`.
    pub fn euler_at(&self, t: f64) -> (Euler, Vec3) {
        let e0 = Vec3::new(
            self.initial_attitude.yaw,
            self.initial_attitude.pitch,
            self.initial_attitude.roll,
        );
        if self.kind == ScenarioKind::Static {
            return (self.initial_attitude, Vec3::zeros());
        }
        let mut angles = e0;
        let mut rates = Vec3::zeros();
        for i in 0..3 {
            let w = 2.0 * PI * self.frequencies[i];
            let arg = w * t + self.phases[i];
            angles[i] += self.amplitudes[i] * arg.sin();
            rates[i] = self.amplitudes[i] * w * arg.cos();
        }
        (Euler::new(angles[0], angles[1], angles[2]), rates)
    }

    /// `C_b^n(t)`.
    pub fn attitude_at(&self, t: f64) -> Mat3 {
        self.euler_at(t).0.to_dcm()
    }

    /// Body rate relative to the navigation frame, from the Euler-rate kinematics of
    /// `C_b^n = Rz(yaw) Rx(pitch) Ry(roll)`.
    pub fn omega_nb_b(&self, t: f64) -> Vec3 {
        let (e, r) = self.euler_at(t);
        let ry = rot_y(e.roll);
        let rx = rot_x(e.pitch);
        ry.transpose() * (rx.transpose() * Vec3::new(0.0, 0.0, r[0]) + Vec3::new(r[1], 0.0, 0.0))
            + Vec3::new(0.0, r[2], 0.0)
    }

    pub fn omega_ib_b(&self, t: f64) -> Vec3 {
        self.attitude_at(t).transpose() * omega_ie_n(&self.earth) + self.omega_nb_b(t)
    }

    pub fn specific_force_b(&self, t: f64) -> Vec3 {
        self.attitude_at(t).transpose() * Vec3::new(0.0, 0.0, self.earth.gravity_mag)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SensorErrors {
    /// rad/s
    pub gyro_bias: Vec3,
    /// m/s^2, additive: measured = true + bias
    pub accel_bias: Vec3,
    /// rad/s per sample
    pub gyro_noise_std: f64,
    /// m/s^2 per sample
    pub accel_noise_std: f64,
}

impl SensorErrors {
    /// Per-sample standard deviations from an angle random walk in deg/sqrt(h) and an
    /// accelerometer noise density in micro-g/sqrt(Hz).
    pub fn stds_from_densities(arw_deg_sqrt_h: f64, accel_ug_sqrt_hz: f64, g: f64, dt: f64) -> (f64, f64) {
        let arw = arw_deg_sqrt_h.to_radians() / 60.0;
        let vrw = accel_ug_sqrt_hz * 1e-6 * g;
        (arw / dt.sqrt(), vrw / dt.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthSample {
    pub t: f64,
    /// `C_b^n(t)`
    pub c_bn: Mat3,
    /// Instantaneous `w_ib^b`, rad/s.
    pub omega_ib_b: Vec3,
    /// Instantaneous `f^b`, m/s^2.
    pub f_b: Vec3,
    pub v_n: Vec3,
    /// Mean rate over `[t, t + dt]`.
    pub gyro_mean: Vec3,
    /// Mean specific force over `[t, t + dt]`.
    pub accel_mean: Vec3,
}

// 5-point Gauss-Legendre nodes and weights on [-1, 1]
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

pub fn generate_truth(cfg: &ScenarioConfig) -> Result<Vec<TruthSample>> {
    cfg.validate()?;
    let n = cfg.sample_count();
    let dt = cfg.dt;
    let earth_step = exp_so3(&(omega_ie_n(&cfg.earth) * dt));
    let mut out = Vec::with_capacity(n);
    let mut c_next = cfg.attitude_at(0.0);
    for k in 0..n {
        let t = k as f64 * dt;
        let c_bn = c_next;
        c_next = cfg.attitude_at(t + dt);
        // C_{b(t_k)}^{b(t_k+1)}: body-frame increment including Earth rotation
        let inc = c_bn.transpose() * earth_step * c_next;
        let gyro_mean = dcm_to_quat(&inc)?.to_rotation_vector() / dt;
        let accel_mean = if cfg.kind == ScenarioKind::Static {
            cfg.specific_force_b(t)
        } else {
            GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(x, w)| w * cfg.specific_force_b(t + 0.5 * dt * (1.0 + x)))
                .sum::<Vec3>()
                * 0.5
        };
        out.push(TruthSample {
            t,
            c_bn,
            omega_ib_b: cfg.omega_ib_b(t),
            f_b: cfg.specific_force_b(t),
            v_n: Vec3::zeros(),
            gyro_mean,
            accel_mean,
        });
    }
    Ok(out)
}

/// IMU samples: truth means plus bias plus i.i.d. Gaussian noise, reproducible from `seed`.
pub fn corrupt(truth: &[TruthSample], errs: &SensorErrors, seed: u64) -> Result<Vec<ImuSample>> {
    if errs.gyro_noise_std < 0.0 || errs.accel_noise_std < 0.0 {
        return Err(Error::InvalidConfig("noise standard deviations must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gyro_noise = Normal::new(0.0, errs.gyro_noise_std)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let accel_noise = Normal::new(0.0, errs.accel_noise_std)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut draw = |d: &Normal<f64>, std: f64| -> Vec3 {
        if std == 0.0 {
            Vec3::zeros()
        } else {
            Vec3::new(d.sample(&mut rng), d.sample(&mut rng), d.sample(&mut rng))
        }
    };
    let zero_bias = errs.gyro_bias == Vec3::zeros() && errs.accel_bias == Vec3::zeros();
    Ok(truth
        .iter()
        .map(|s| {
            let gn = draw(&gyro_noise, errs.gyro_noise_std);
            let an = draw(&accel_noise, errs.accel_noise_std);
            if zero_bias && errs.gyro_noise_std == 0.0 && errs.accel_noise_std == 0.0 {
                ImuSample {
                    t: s.t,
                    gyro: s.gyro_mean,
                    accel: s.accel_mean,
                }
            } else {
                ImuSample {
                    t: s.t,
                    gyro: s.gyro_mean + errs.gyro_bias + gn,
                    accel: s.accel_mean + errs.accel_bias + an,
                }
            }
        })
        .collect())
}

/// True `C_{b(t)}^{b(0)} = C_b^n(0)^T C_{n(t)}^{n(0)} C_b^n(t)` for every truth sample.
pub fn true_body_rotation(truth: &[TruthSample], earth: &EarthParams) -> Vec<Mat3> {
    let Some(first) = truth.first() else {
        return Vec::new();
    };
    let w = omega_ie_n(earth);
    truth
        .iter()
        .map(|s| first.c_bn.transpose() * exp_so3(&(w * s.t)) * s.c_bn)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rotation_angle;

    #[test]
    fn static_identity_signals() {
        let cfg = ScenarioConfig::static_base(0.7, Euler::default(), 1.0, 0.01);
        let truth = generate_truth(&cfg).unwrap();
        assert_eq!(truth.len(), 100);
        let w = omega_ie_n(&cfg.earth);
        assert!((truth[0].omega_ib_b - w).norm() < 1e-20);
        assert_eq!(truth[0].f_b, Vec3::new(0.0, 0.0, cfg.earth.gravity_mag));
        assert!((truth[10].gyro_mean - w).norm() < 1e-13);
    }

    #[test]
    fn static_yawed_signals() {
        let cfg = ScenarioConfig::static_base(0.7, Euler::new(90f64.to_radians(), 0.0, 0.0), 1.0, 0.01);
        let truth = generate_truth(&cfg).unwrap();
        let w = omega_ie_n(&cfg.earth);
        // yaw +90 deg: body x points north, body y points west
        let expected = Vec3::new(w.y, -w.x, w.z);
        assert!((truth[0].omega_ib_b - expected).norm() < 1e-18);
        assert!((truth[0].f_b - Vec3::new(0.0, 0.0, cfg.earth.gravity_mag)).norm() < 1e-15);
    }

    #[test]
    fn rocking_rates_match_differentiated_attitude() {
        let cfg = ScenarioConfig::rocking_base(0.6, Euler::new(0.3, 0.02, -0.01), 10.0, 0.01);
        let h = 1e-5;
        for t in [0.37, 2.5, 7.77] {
            let c = cfg.attitude_at(t);
            let cdot = (cfg.attitude_at(t + h) - cfg.attitude_at(t - h)) / (2.0 * h);
            let wx = c.transpose() * cdot;
            let fd = Vec3::new(wx[(2, 1)], wx[(0, 2)], wx[(1, 0)]);
            assert!((fd - cfg.omega_nb_b(t)).norm() < 1e-9);
            assert!((cfg.specific_force_b(t).norm() - cfg.earth.gravity_mag).abs() < 1e-12);
        }
    }

    #[test]
    fn fine_step_integration_reproduces_attitude() {
        let cfg = ScenarioConfig::rocking_base(0.6, Euler::new(0.3, 0.02, -0.01), 2.0, 0.01);
        let truth = generate_truth(&cfg).unwrap();
        let w_ie = omega_ie_n(&cfg.earth);
        let sub = 200;
        let h = cfg.dt / sub as f64;
        let mut c = truth[0].c_bn;
        let mut t = 0.0;
        for _ in 0..(truth.len() * sub) {
            // midpoint rule for C_dot = C [w_nb x] on the level-frame attitude
            let mid = t + 0.5 * h;
            let w_nb = cfg.omega_ib_b(mid) - cfg.attitude_at(mid).transpose() * w_ie;
            c = crate::math::orthonormalize(&(c * exp_so3(&(w_nb * h))));
            t += h;
        }
        let expected = cfg.attitude_at(t);
        assert!(rotation_angle(&c, &expected) < 1e-9);
    }

    #[test]
    fn increments_reproduce_inertial_attitude() {
        let cfg = ScenarioConfig::rocking_base(0.6, Euler::new(0.3, 0.02, -0.01), 5.0, 0.01);
        let truth = generate_truth(&cfg).unwrap();
        let rots = true_body_rotation(&truth, &cfg.earth);
        let mut c = Mat3::identity();
        for (k, s) in truth.iter().enumerate() {
            assert!(rotation_angle(&c, &rots[k]) < 1e-12);
            c *= exp_so3(&(s.gyro_mean * cfg.dt));
        }
    }

    #[test]
    fn aliased_profile_rejected() {
        let mut cfg = ScenarioConfig::rocking_base(0.6, Euler::default(), 1.0, 0.01);
        cfg.frequencies.x = 60.0;
        assert!(matches!(generate_truth(&cfg), Err(Error::AliasedProfile { .. })));
    }

    #[test]
    fn corruption_cases() {
        let cfg = ScenarioConfig::static_base(0.7, Euler::default(), 1.0, 0.01);
        let truth = generate_truth(&cfg).unwrap();
        let clean = corrupt(&truth, &SensorErrors::default(), 1).unwrap();
        for (s, t) in clean.iter().zip(&truth) {
            assert_eq!(s.gyro, t.gyro_mean);
            assert_eq!(s.accel, t.accel_mean);
        }
        let errs = SensorErrors {
            gyro_bias: Vec3::new(1e-5, -2e-5, 3e-5),
            accel_bias: Vec3::new(1e-3, 0.0, -1e-3),
            ..SensorErrors::default()
        };
        let biased = corrupt(&truth, &errs, 1).unwrap();
        for (s, t) in biased.iter().zip(&truth) {
            assert!((s.gyro - t.gyro_mean - errs.gyro_bias).norm() < 1e-18);
            assert!((s.accel - t.accel_mean - errs.accel_bias).norm() < 1e-15);
        }
    }

    #[test]
    fn noise_statistics() {
        let cfg = ScenarioConfig::static_base(0.7, Euler::default(), 1000.0, 0.01);
        let truth = generate_truth(&cfg).unwrap();
        let errs = SensorErrors {
            gyro_noise_std: 3e-5,
            accel_noise_std: 5e-3,
            ..SensorErrors::default()
        };
        let a = corrupt(&truth, &errs, 42).unwrap();
        let b = corrupt(&truth, &errs, 42).unwrap();
        assert_eq!(a, b);
        let n = a.len() as f64;
        let gx: Vec<f64> = a.iter().zip(&truth).map(|(s, t)| s.gyro.x - t.gyro_mean.x).collect();
        let fz: Vec<f64> = a.iter().zip(&truth).map(|(s, t)| s.accel.z - t.accel_mean.z).collect();
        let std = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / n;
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        assert!((std(&gx) / 3e-5 - 1.0).abs() < 0.02);
        assert!((std(&fz) / 5e-3 - 1.0).abs() < 0.02);
    }
}
