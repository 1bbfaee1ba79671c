//! Quaternion and rotation-matrix algebra.
//!
//! Quaternions are stored vector part first, scalar part last: `q = [rho; eta]`.
//! Two 4x4 compound operators act on them:
//!
//! ```text
//! q^+ = [ eta*I - [rho x]   rho ]      q^(+) = [ eta*I + [rho x]   rho ]
//!       [ -rho^T            eta ]              [ -rho^T            eta ]
//! ```
//!
//! and they commute in the sense `q^+ p = p^(+) q`. The product used throughout the crate is
//! [`Quaternion::mul`], defined as `a * b = a^+ b`. With this product `a * b` is the Hamilton
//! product `b (x) a`, so `dcm(a * b) = dcm(b) * dcm(a)`.
//!
//! The rotation matrix of a unit quaternion is the upper-left block of `(q^-1)^+ q^(+)`:
//!
//! ```text
//! C(q) = (eta^2 - |rho|^2) I + 2 rho rho^T + 2 eta [rho x]
//! ```
//!
//! `C(q)` maps vectors from the frame a quaternion is attached to into its reference frame
//! (e.g. `v^n = C(q_bn) v^b`). Kinematics follow `q_dot = 1/2 xi(q) w`, equivalent to
//! `C_dot = C [w x]`.

use nalgebra::{Matrix3, Matrix4, Matrix4x3, Vector3, Vector4};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Vec4 = Vector4<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Mat4 = Matrix4<f64>;

/// Tolerance on `|q| - 1` accepted by [`quat_to_dcm`].
pub const UNIT_TOLERANCE: f64 = 1e-6;
/// Tolerance on `||C^T C - I||_F` accepted for rotation matrices.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

/// Cross-product matrix: `skew(v) * u == v.cross(&u)`.
pub fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Quaternion `[rho; eta]`. Not necessarily unit: the compound operators are defined for any
/// four numbers, and [`Quaternion::normalize`] produces the unit form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub rho: Vec3,
    pub eta: f64,
}

/// Homogeneous 3-vector `[v; w]`, embedded as a quaternion for the point-cloud formulation.
/// Points carry `w = 1`, translations `w = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomVec {
    pub v: Vec3,
    pub w: f64,
}

impl HomVec {
    pub fn point(v: Vec3) -> Self {
        Self { v, w: 1.0 }
    }

    pub fn translation(v: Vec3) -> Self {
        Self { v, w: 0.0 }
    }

    pub fn as_quaternion(&self) -> Quaternion {
        Quaternion::new(self.v, self.w)
    }

    pub fn to_vec4(&self) -> Vec4 {
        Vec4::new(self.v.x, self.v.y, self.v.z, self.w)
    }
}

impl Quaternion {
    pub const fn new(rho: Vec3, eta: f64) -> Self {
        Self { rho, eta }
    }

    pub fn identity() -> Self {
        Self::new(Vec3::zeros(), 1.0)
    }

    /// Pure quaternion `[v; 0]`.
    pub fn pure(v: Vec3) -> Self {
        Self::new(v, 0.0)
    }

    pub fn from_vec4(v: &Vec4) -> Self {
        Self::new(Vec3::new(v[0], v[1], v[2]), v[3])
    }

    pub fn to_vec4(&self) -> Vec4 {
        Vec4::new(self.rho.x, self.rho.y, self.rho.z, self.eta)
    }

    pub fn norm(&self) -> f64 {
        self.to_vec4().norm()
    }

    /// Rescale to unit norm.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNormQuaternion);
        }
        Ok(Self::new(self.rho / n, self.eta / n))
    }

    /// Conjugate `[-rho; eta]`; the inverse for unit quaternions.
    pub fn inverse(&self) -> Self {
        Self::new(-self.rho, self.eta)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.rho, -self.eta)
    }

    /// `self^+ * other`.
    pub fn mul(&self, other: &Self) -> Self {
        let rho = self.eta * other.rho + other.eta * self.rho - self.rho.cross(&other.rho);
        let eta = self.eta * other.eta - self.rho.dot(&other.rho);
        Self::new(rho, eta)
    }

    /// Left compound operator `q^+`.
    pub fn plus(&self) -> Mat4 {
        compound(self, -1.0)
    }

    /// Right compound operator `q^(+)`.
    pub fn oplus(&self) -> Mat4 {
        compound(self, 1.0)
    }

    /// The 4x3 kinematics matrix `[eta I + [rho x]; -rho^T]`.
    pub fn xi(&self) -> Matrix4x3<f64> {
        let top = Mat3::identity() * self.eta + skew(&self.rho);
        let mut m = Matrix4x3::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&top);
        m.fixed_view_mut::<1, 3>(3, 0).copy_from(&(-self.rho.transpose()));
        m
    }

    /// Rotation matrix without the unit-norm check. The caller guarantees `|q| = 1`.
    pub fn dcm(&self) -> Mat3 {
        let r = &self.rho;
        let e = self.eta;
        Mat3::identity() * (e * e - r.dot(r)) + 2.0 * r * r.transpose() + 2.0 * e * skew(r)
    }

    /// Unit quaternion whose matrix is `exp([phi x])`.
    pub fn from_rotation_vector(phi: &Vec3) -> Self {
        let angle = phi.norm();
        let half = 0.5 * angle;
        // sin(x)/x series below 1e-4 keeps full precision
        let k = if angle < 1e-4 {
            0.5 - angle * angle / 48.0
        } else {
            half.sin() / angle
        };
        Self::new(phi * k, half.cos())
    }

    /// Rotation vector of a unit quaternion, angle in `[0, pi]`.
    pub fn to_rotation_vector(&self) -> Vec3 {
        let q = if self.eta < 0.0 { self.neg() } else { *self };
        let s = q.rho.norm();
        if s < 1e-12 {
            return 2.0 * q.rho / q.eta;
        }
        let angle = 2.0 * s.atan2(q.eta);
        q.rho * (angle / s)
    }

    /// Sign convention for the `+-q` ambiguity: `eta >= 0`, and when `eta == 0`
    /// the first nonzero component is positive.
    pub fn canonical(&self) -> Self {
        let v = self.to_vec4();
        let flip = if self.eta != 0.0 {
            self.eta < 0.0
        } else {
            v.iter().find(|c| **c != 0.0).is_some_and(|c| *c < 0.0)
        };
        if flip {
            self.neg()
        } else {
            *self
        }
    }
}

fn compound(q: &Quaternion, sign: f64) -> Mat4 {
    let mut m = Mat4::zeros();
    let top = Mat3::identity() * q.eta + sign * skew(&q.rho);
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&top);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&q.rho);
    m.fixed_view_mut::<1, 3>(3, 0).copy_from(&(-q.rho.transpose()));
    m[(3, 3)] = q.eta;
    m
}

pub fn quat_plus(q: &Quaternion) -> Mat4 {
    q.plus()
}

pub fn quat_oplus(q: &Quaternion) -> Mat4 {
    q.oplus()
}

pub fn xi(q: &Quaternion) -> Matrix4x3<f64> {
    q.xi()
}

pub fn quat_mul(a: &Quaternion, b: &Quaternion) -> Quaternion {
    a.mul(b)
}

pub fn quat_inv(q: &Quaternion) -> Quaternion {
    q.inverse()
}

pub fn quat_normalize(q: &Quaternion) -> Result<Quaternion> {
    q.normalize()
}

/// Homogeneous rotation `(q^-1)^+ q^(+)`; equals `[C 0; 0 1]` for unit `q`.
pub fn homogeneous_rotation(q: &Quaternion) -> Mat4 {
    q.inverse().plus() * q.oplus()
}

pub fn quat_to_dcm(q: &Quaternion) -> Result<Mat3> {
    let n = q.norm();
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NonUnitQuaternion { norm: n });
    }
    Ok(q.dcm())
}

/// `||C^T C - I||_F`.
pub fn orthonormality_error(c: &Mat3) -> f64 {
    (c.transpose() * c - Mat3::identity()).norm()
}

/// Largest-diagonal branch extraction; the result has `eta >= 0`.
pub fn dcm_to_quat(c: &Mat3) -> Result<Quaternion> {
    let dev = orthonormality_error(c);
    if dev > ORTHONORMAL_TOLERANCE || c.determinant() < 0.0 {
        return Err(Error::NonOrthonormalDcm { deviation: dev });
    }
    Ok(dcm_to_quat_unchecked(c))
}

fn dcm_to_quat_unchecked(c: &Mat3) -> Quaternion {
    let tr = c.trace();
    let diag = [c[(0, 0)], c[(1, 1)], c[(2, 2)]];
    let (imax, dmax) = diag
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, d)| if *d > acc.1 { (i, *d) } else { acc });
    let q = if tr >= dmax {
        let eta = 0.5 * (1.0 + tr).sqrt();
        let f = 0.25 / eta;
        Quaternion::new(
            Vec3::new(
                (c[(2, 1)] - c[(1, 2)]) * f,
                (c[(0, 2)] - c[(2, 0)]) * f,
                (c[(1, 0)] - c[(0, 1)]) * f,
            ),
            eta,
        )
    } else {
        let (i, j, k) = match imax {
            0 => (0, 1, 2),
            1 => (1, 2, 0),
            _ => (2, 0, 1),
        };
        let ri = 0.5 * (1.0 + 2.0 * c[(i, i)] - tr).sqrt();
        let f = 0.25 / ri;
        let mut rho = Vec3::zeros();
        rho[i] = ri;
        rho[j] = (c[(j, i)] + c[(i, j)]) * f;
        rho[k] = (c[(k, i)] + c[(i, k)]) * f;
        Quaternion::new(rho, (c[(k, j)] - c[(j, k)]) * f)
    };
    let q = if q.eta < 0.0 { q.neg() } else { q };
    // normalization only fails on a zero quaternion, impossible from the branches above
    q.normalize().unwrap_or(q)
}

/// Closest rotation via the quaternion round trip.
pub fn orthonormalize(c: &Mat3) -> Mat3 {
    dcm_to_quat_unchecked(c).dcm()
}

/// Matrix exponential of `[phi x]`.
pub fn exp_so3(phi: &Vec3) -> Mat3 {
    Quaternion::from_rotation_vector(phi).dcm()
}

/// Angle of the relative rotation `a^T b`, in radians.
pub fn rotation_angle(a: &Mat3, b: &Mat3) -> f64 {
    let q = dcm_to_quat_unchecked(&(a.transpose() * b));
    2.0 * q.rho.norm().atan2(q.eta.abs())
}

/// Euler angles for the East-North-Up frame with a right-forward-up body:
/// `C_b^n = Rz(yaw) Rx(pitch) Ry(roll)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Euler {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Euler {
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Self { yaw, pitch, roll }
    }

    pub fn to_dcm(&self) -> Mat3 {
        rot_z(self.yaw) * rot_x(self.pitch) * rot_y(self.roll)
    }

    pub fn from_dcm(c: &Mat3) -> Self {
        let pitch = c[(2, 1)].clamp(-1.0, 1.0).asin();
        let roll = (-c[(2, 0)]).atan2(c[(2, 2)]);
        let yaw = (-c[(0, 1)]).atan2(c[(1, 1)]);
        Self { yaw, pitch, roll }
    }
}

pub fn rot_x(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(a: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Per-axis attitude error between an estimate and the truth: the Euler angles of the
/// navigation-frame misalignment `C_est C_true^T`, in radians. A pure heading offset shows up
/// only in `yaw`.
pub fn attitude_error(est: &Mat3, truth: &Mat3) -> Euler {
    Euler::from_dcm(&(est * truth.transpose()))
}
