//! Multiplicative extended Kalman filter for the body rotation `C_{b(t)}^{b(0)}` and the
//! gyroscope bias.
//!
//! The reference quaternion `q` has `dcm(q) = C_{b(t)}^{b(0)}` and starts at identity, since the
//! body frame at `t = 0` is the reference. The error state is `[dtheta; dbias]` with the
//! attitude error applied on the body side, `q_true = q (x) dq(dtheta)`, which gives
//!
//! ```text
//! F = [ -[w x]  -I ]    G = [ -I  0 ]
//!     [   0      0 ]        [  0  I ]
//! ```
//!
//! The measurement is the body-frame vector `alpha_m`, predicted as
//! `h = A(q) beta_m` with the attitude matrix `A(q) = dcm(q)^T`, so `H = [[h x], 0]`.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{skew, Mat3, Quaternion, Vec3};
use crate::vecobs::BodyObsPair;

pub type Mat6 = SMatrix<f64, 6, 6>;
pub type Mat3x6 = SMatrix<f64, 3, 6>;
pub type Vec6 = SVector<f64, 6>;

/// Innovations beyond this many standard deviations (per component) are rejected.
pub const GATE_SIGMA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Gyro angle random walk density, rad/sqrt(s).
    pub sigma_gv: f64,
    /// Gyro bias random walk density, rad/s/sqrt(s).
    pub sigma_gu: f64,
    /// Measurement covariance of one observation pair, (m/s)^2.
    pub r_meas: Mat3,
    /// Initial attitude variance, rad^2.
    pub p0_att: f64,
    /// Initial bias variance, (rad/s)^2.
    pub p0_bias: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        let accel_density = 50e-6 * crate::earth::STANDARD_GRAVITY;
        Self {
            sigma_gv: 0.01f64.to_radians() / 60.0,
            sigma_gu: 1e-9,
            r_meas: Self::r_from_accel_density(accel_density, 1.0),
            p0_att: 1e-12,
            p0_bias: (20f64.to_radians() / 3600.0).powi(2),
        }
    }
}

impl NoiseParams {
    /// White accelerometer noise of density `sigma_f` (m/s^2/sqrt(Hz)) integrated over a window
    /// of `t_obs` seconds: `sigma_f^2 t_obs I`.
    pub fn r_from_accel_density(sigma_f: f64, t_obs: f64) -> Mat3 {
        Mat3::identity() * (sigma_f * sigma_f * t_obs)
    }

    pub fn validate(&self) -> Result<()> {
        let scalars = [self.sigma_gv, self.sigma_gu, self.p0_att, self.p0_bias];
        if scalars.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidConfig("noise parameters must be nonnegative".into()));
        }
        let sym = (self.r_meas - self.r_meas.transpose()).norm();
        if sym > 1e-12 * self.r_meas.norm() || self.r_meas.cholesky().is_none() {
            return Err(Error::InvalidConfig(
                "measurement covariance must be symmetric positive definite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    pub q: Quaternion,
    pub b_g: Vec3,
    pub p: Mat6,
    pub t: f64,
}

/// Outcome of one measurement update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateInfo {
    pub innovation: Vec3,
    /// Innovation covariance diagonal.
    pub innovation_var: Vec3,
    pub accepted: bool,
}

pub fn init(noise: &NoiseParams) -> FilterState {
    let mut p = Mat6::zeros();
    for i in 0..3 {
        p[(i, i)] = noise.p0_att;
        p[(i + 3, i + 3)] = noise.p0_bias;
    }
    FilterState {
        q: Quaternion::identity(),
        b_g: Vec3::zeros(),
        p,
        t: 0.0,
    }
}

fn symmetrize(p: &Mat6) -> Mat6 {
    (p + p.transpose()) * 0.5
}

pub fn propagate(s: &FilterState, gyro: &Vec3, dt: f64, noise: &NoiseParams) -> Result<FilterState> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    let w = gyro - s.b_g;
    let dq = Quaternion::from_rotation_vector(&(w * dt));
    let q = dq.mul(&s.q).normalize()?;

    let mut phi = Mat6::identity();
    phi.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&(Mat3::identity() - skew(&w) * dt));
    phi.fixed_view_mut::<3, 3>(0, 3)
        .copy_from(&(-Mat3::identity() * dt));
    let mut qd = Mat6::zeros();
    for i in 0..3 {
        qd[(i, i)] = noise.sigma_gv * noise.sigma_gv * dt;
        qd[(i + 3, i + 3)] = noise.sigma_gu * noise.sigma_gu * dt;
    }
    let p = symmetrize(&(phi * s.p * phi.transpose() + qd));
    Ok(FilterState {
        q,
        b_g: s.b_g,
        p,
        t: s.t + dt,
    })
}

/// Predicted `alpha_m`: `dcm(q)^T beta_m`.
pub fn measurement_model(q: &Quaternion, beta_m: &Vec3) -> Vec3 {
    q.dcm().transpose() * beta_m
}

pub fn measurement_jacobian(q: &Quaternion, beta_m: &Vec3) -> Mat3x6 {
    let mut h = Mat3x6::zeros();
    h.fixed_view_mut::<3, 3>(0, 0)
        .copy_from(&skew(&measurement_model(q, beta_m)));
    h
}

/// Applies an error-state correction: additive reset of the quaternion through `xi`, then
/// renormalization.
pub fn apply_correction(s: &FilterState, dx: &Vec6) -> Result<(Quaternion, Vec3)> {
    let dtheta = Vec3::new(dx[0], dx[1], dx[2]);
    let qv = s.q.to_vec4() + 0.5 * s.q.xi() * dtheta;
    let q = Quaternion::from_vec4(&qv).normalize()?;
    Ok((q, s.b_g + Vec3::new(dx[3], dx[4], dx[5])))
}

pub fn update(s: &FilterState, obs: &BodyObsPair, noise: &NoiseParams) -> Result<FilterState> {
    update_detailed(s, obs, noise).map(|(state, _)| state)
}

pub fn update_detailed(
    s: &FilterState,
    obs: &BodyObsPair,
    noise: &NoiseParams,
) -> Result<(FilterState, UpdateInfo)> {
    let h = measurement_jacobian(&s.q, &obs.beta_m);
    let predicted = measurement_model(&s.q, &obs.beta_m);
    let innovation = obs.alpha_m - predicted;
    let pht = s.p * h.transpose();
    let cov = h * pht + noise.r_meas;
    let cov = (cov + cov.transpose()) * 0.5;
    let innovation_var = cov.diagonal();
    let chol = cov.cholesky().ok_or(Error::SingularInnovationCovariance)?;

    let accepted = (0..3).all(|i| innovation[i].abs() <= GATE_SIGMA * innovation_var[i].sqrt());
    let info = UpdateInfo {
        innovation,
        innovation_var,
        accepted,
    };
    if !accepted {
        return Ok((*s, info));
    }

    // K = P H^T S^-1, via the transpose solve S K^T = H P
    let gain = chol.solve(&pht.transpose()).transpose();
    let dx = gain * innovation;
    let (q, b_g) = apply_correction(s, &dx)?;
    let ikh = Mat6::identity() - gain * h;
    let p = symmetrize(&(ikh * s.p * ikh.transpose() + gain * noise.r_meas * gain.transpose()));
    Ok((FilterState { q, b_g, p, t: s.t }, info))
}

/// `C_{b(t)}^{b(0)}`.
pub fn attitude(s: &FilterState) -> Mat3 {
    s.q.dcm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{orthonormality_error, rotation_angle};

    fn quiet() -> NoiseParams {
        NoiseParams {
            sigma_gv: 1e-6,
            sigma_gu: 1e-9,
            r_meas: Mat3::identity() * 1e-6,
            p0_att: 1e-8,
            p0_bias: 1e-8,
        }
    }

    #[test]
    fn init_state() {
        let s = init(&NoiseParams::default());
        assert_eq!(s.q, Quaternion::identity());
        assert_eq!(s.b_g, Vec3::zeros());
        assert_eq!(attitude(&s), Mat3::identity());
        let n = NoiseParams {
            p0_att: 0.0,
            ..NoiseParams::default()
        };
        let s = init(&n);
        assert_eq!(s.p.fixed_view::<3, 3>(0, 0).norm(), 0.0);
        assert!(n.validate().is_ok());
    }

    #[test]
    fn bias_cancels_rate() {
        let mut s = init(&quiet());
        s.b_g = Vec3::new(0.01, -0.02, 0.03);
        let out = propagate(&s, &s.b_g.clone(), 0.01, &quiet()).unwrap();
        assert_eq!(out.q, s.q);
    }

    #[test]
    fn quarter_turn_and_trace_growth() {
        let noise = quiet();
        let w = std::f64::consts::FRAC_PI_2 / 10.0;
        let mut s = init(&noise);
        let mut trace = s.p.trace();
        for _ in 0..1000 {
            s = propagate(&s, &Vec3::new(0.0, 0.0, w), 0.01, &noise).unwrap();
            assert!(s.p.trace() >= trace);
            trace = s.p.trace();
        }
        let expected = Mat3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        assert!(rotation_angle(&attitude(&s), &expected) < 1e-12);
        assert!(orthonormality_error(&attitude(&s)) < 1e-9);
    }

    #[test]
    fn zero_innovation_keeps_state() {
        let noise = quiet();
        let mut s = init(&noise);
        s.q = Quaternion::from_rotation_vector(&Vec3::new(0.1, 0.2, -0.3));
        let beta_m = Vec3::new(0.1, -0.3, 9.8);
        let obs = BodyObsPair {
            alpha_m: measurement_model(&s.q, &beta_m),
            beta_m,
            t: 0.0,
        };
        let out = update(&s, &obs, &noise).unwrap();
        assert!((out.q.to_vec4() - s.q.to_vec4()).norm() < 1e-15);
        assert_eq!(out.b_g, s.b_g);
        assert!(out.p.trace() < s.p.trace());
    }

    #[test]
    fn singular_innovation_covariance() {
        let noise = NoiseParams {
            r_meas: Mat3::zeros(),
            p0_att: 0.0,
            ..quiet()
        };
        let s = init(&noise);
        let obs = BodyObsPair {
            alpha_m: Vec3::z(),
            beta_m: Vec3::z(),
            t: 0.0,
        };
        assert!(matches!(
            update(&s, &obs, &noise),
            Err(Error::SingularInnovationCovariance)
        ));
    }

    #[test]
    fn gate_rejects_outliers() {
        let noise = quiet();
        let s = init(&noise);
        let obs = BodyObsPair {
            alpha_m: Vec3::new(5.0, 0.0, 9.8),
            beta_m: Vec3::new(0.0, 0.0, 9.8),
            t: 0.0,
        };
        let (out, info) = update_detailed(&s, &obs, &noise).unwrap();
        assert!(!info.accepted);
        assert_eq!(out, s);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let q = Quaternion::from_rotation_vector(&Vec3::new(0.3, -1.0, 0.4));
        let beta_m = Vec3::new(1.0, -2.0, 9.0);
        let h = measurement_jacobian(&q, &beta_m);
        let step = 1e-6;
        for i in 0..3 {
            let mut d = Vec3::zeros();
            d[i] = step;
            let plus = Quaternion::from_rotation_vector(&d).mul(&q);
            let minus = Quaternion::from_rotation_vector(&(-d)).mul(&q);
            let col = (measurement_model(&plus, &beta_m) - measurement_model(&minus, &beta_m))
                / (2.0 * step);
            assert!((col - h.column(i)).norm() < 1e-6 * col.norm().max(1.0));
        }
        assert_eq!(h.fixed_view::<3, 3>(0, 3).norm(), 0.0);
    }
}
