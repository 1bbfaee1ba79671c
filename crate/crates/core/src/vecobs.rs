//! Vector observations built from raw inertial data.
//!
//! For a window `[t_m, t]` of `M - m` samples of period `dt`:
//!
//! ```text
//! alpha = sum_k C_{b(t_k)}^{b(0)} (dt I + dt^2/2 [w_k x]) f_k
//! chi   = sum_k C_{b(t_k)}^{b(0)} (dt I + dt^2/2 [w_k x])
//! beta  = C_{n(t)}^{n(0)} v(t) - C_{n(t_m)}^{n(0)} v(t_m)
//!       + sum_k C_{n(t_k)}^{n(0)} [ (dt/2 I + dt^2/6 [w_in x]) (w_ie x v_k)
//!                                 + (dt/2 I + dt^2/3 [w_in x]) (w_ie x v_{k+1}) ]
//!       - sum_k C_{n(t_k)}^{n(0)} (dt I + dt^2/2 [w_in x]) g
//! ```
//!
//! With the true attitude and accelerometer bias correction `b_a` these satisfy
//! `C_b^n(0) (alpha + chi b_a) = beta`.

use serde::{Deserialize, Serialize};

use crate::earth::{gravity_n, omega_ie_n, EarthParams, NavRotation};
use crate::error::{Error, Result};
use crate::math::{orthonormality_error, skew, Mat3, Vec3, ORTHONORMAL_TOLERANCE};

/// Largest accepted deviation of a sample interval from the nominal period, in seconds.
pub const MAX_JITTER: f64 = 1e-6;

/// One IMU record. `gyro` and `accel` are the mean angular rate (rad/s) and mean specific
/// force (m/s^2) over `[t, t + dt]`, i.e. the sensor increments divided by `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    pub gyro: Vec3,
    pub accel: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocitySample {
    pub t: f64,
    pub v_n: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationTriple {
    pub alpha: Vec3,
    pub chi: Mat3,
    pub beta: Vec3,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyObsPair {
    pub alpha_m: Vec3,
    pub beta_m: Vec3,
    pub t: f64,
}

/// Checks that timestamps increase by `dt` within [`MAX_JITTER`] and that all values are finite.
pub fn validate_stream(samples: &[ImuSample], dt: f64) -> Result<()> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveDt(dt));
    }
    for (i, s) in samples.iter().enumerate() {
        let finite = s.t.is_finite()
            && s.gyro.iter().all(|x| x.is_finite())
            && s.accel.iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::Format {
                row: i + 1,
                column: 0,
                message: "non-finite value".into(),
            });
        }
    }
    for (i, pair) in samples.windows(2).enumerate() {
        let interval = pair[1].t - pair[0].t;
        if (interval - dt).abs() > MAX_JITTER {
            return Err(Error::NonUniformSampling {
                index: i + 1,
                interval,
                expected: dt,
            });
        }
    }
    Ok(())
}

/// Streaming accumulator for `alpha` and `chi` over one window.
#[derive(Debug, Clone)]
pub struct AlphaChiAccumulator {
    dt: f64,
    alpha: Vec3,
    chi: Mat3,
    count: usize,
}

impl AlphaChiAccumulator {
    pub fn new(dt: f64) -> Self {
        Self {
            dt,
            alpha: Vec3::zeros(),
            chi: Mat3::zeros(),
            count: 0,
        }
    }

    /// Adds the term for one sample. `c_b0_bk` is the attitude `C_{b(t_k)}^{b(0)}` at the start
    /// of the sample interval and `gyro_bias` is subtracted from the rate before use.
    pub fn push(&mut self, sample: &ImuSample, c_b0_bk: &Mat3, gyro_bias: &Vec3) {
        let dt = self.dt;
        let w = sample.gyro - gyro_bias;
        let weight = c_b0_bk * (Mat3::identity() * dt + skew(&w) * (0.5 * dt * dt));
        self.alpha += weight * sample.accel;
        self.chi += weight;
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn alpha(&self) -> Vec3 {
        self.alpha
    }

    pub fn chi(&self) -> Mat3 {
        self.chi
    }

    pub fn finish(&self) -> Result<(Vec3, Mat3)> {
        if self.count == 0 {
            return Err(Error::EmptyWindow);
        }
        Ok((self.alpha, self.chi))
    }
}

/// Batch form of [`AlphaChiAccumulator`].
pub fn accumulate_alpha_chi(
    samples: &[ImuSample],
    c_b0_bt_seq: &[Mat3],
    gyro_bias: &Vec3,
    dt: f64,
) -> Result<(Vec3, Mat3)> {
    if samples.len() != c_b0_bt_seq.len() {
        return Err(Error::MismatchedLengths {
            left: samples.len(),
            right: c_b0_bt_seq.len(),
        });
    }
    let mut acc = AlphaChiAccumulator::new(dt);
    for (s, c) in samples.iter().zip(c_b0_bt_seq) {
        acc.push(s, c, gyro_bias);
    }
    acc.finish()
}

fn grid_index(nav: &[NavRotation], t: f64, dt: f64) -> Option<usize> {
    let first = nav.first()?.t;
    let k = ((t - first) / dt).round();
    if k < 0.0 {
        return None;
    }
    let k = k as usize;
    nav.get(k).filter(|n| (n.t - t).abs() <= 0.5 * dt).map(|_| k)
}

/// `beta` over `window = (t_m, t)`. `nav` and, when given, `vel` are sampled on the same
/// uniform grid of period `dt`; a missing velocity stream means a static base.
pub fn accumulate_beta(
    nav: &[NavRotation],
    vel: Option<&[VelocitySample]>,
    p: &EarthParams,
    window: (f64, f64),
    dt: f64,
) -> Result<Vec3> {
    let (t_m, t_end) = window;
    let not_covered = || Error::WindowNotCovered {
        start: t_m,
        end: t_end,
    };
    if !(t_end > t_m) {
        return Err(Error::EmptyWindow);
    }
    let m = grid_index(nav, t_m, dt).ok_or_else(not_covered)?;
    let end = grid_index(nav, t_end, dt).ok_or_else(not_covered)?;
    if let Some(v) = vel {
        if v.len() < nav.len().min(end + 1) {
            return Err(not_covered());
        }
    }

    let w_ie = omega_ie_n(p);
    // transport rate is zero for the supported base motions
    let w_in = w_ie;
    let g = gravity_n(p);
    let wx = skew(&w_in);
    let eye = Mat3::identity();
    let grav_weight = eye * dt + wx * (0.5 * dt * dt);
    let lead = eye * (0.5 * dt) + wx * (dt * dt / 6.0);
    let trail = eye * (0.5 * dt) + wx * (dt * dt / 3.0);

    let mut beta = Vec3::zeros();
    if let Some(v) = vel {
        beta += nav[end].c_n0_nt * v[end].v_n - nav[m].c_n0_nt * v[m].v_n;
        for k in m..end {
            let coriolis = lead * w_ie.cross(&v[k].v_n) + trail * w_ie.cross(&v[k + 1].v_n);
            beta += nav[k].c_n0_nt * coriolis;
        }
    }
    for nr in &nav[m..end] {
        beta -= nr.c_n0_nt * (grav_weight * g);
    }
    Ok(beta)
}

fn check_rotation(c: &Mat3) -> Result<()> {
    let dev = orthonormality_error(c);
    if dev > ORTHONORMAL_TOLERANCE {
        return Err(Error::NonOrthonormalInput { deviation: dev });
    }
    Ok(())
}

/// Body-frame observation pair for the filter: `alpha_m = C_{b(t)}^{b(0)T} alpha`,
/// `beta_m = C_b^n(0)^T beta`. With exact inputs `C_{b(t)}^{b(0)} alpha_m = beta_m`.
pub fn make_body_pair(
    triple: &ObservationTriple,
    c_b0_bt: &Mat3,
    c_bn0: &Mat3,
) -> Result<BodyObsPair> {
    check_rotation(c_b0_bt)?;
    check_rotation(c_bn0)?;
    Ok(BodyObsPair {
        alpha_m: c_b0_bt.transpose() * triple.alpha,
        beta_m: c_bn0.transpose() * triple.beta,
        t: triple.t_end,
    })
}
