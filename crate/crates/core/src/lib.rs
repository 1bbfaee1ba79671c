//! Strapdown inertial alignment by interlacing a closed-form eigenvalue solution for the initial
//! attitude and accelerometer bias with a multiplicative extended Kalman filter for the body
//! rotation and gyro bias.
//!
//! Conventions used throughout:
//! - quaternions are stored vector part first, `q = [rho; eta]`;
//! - [`math::quat_mul`]`(a, b)` is the matrix product `a^+ b`;
//! - the navigation frame is East-North-Up and body axes are right-forward-up;
//! - [`math::Euler`] composes as `C_b^n = Rz(yaw) Rx(pitch) Ry(roll)`;
//! - sensor biases are additive: `measured = true + bias`.

pub mod align;
pub mod cli;
pub mod earth;
pub mod eigen;
pub mod error;
pub mod io;
pub mod math;
pub mod mekf;
pub mod optimizer;
pub mod sim;
pub mod vecobs;

pub use align::{run_alignment, AlignmentSolution, SaaConfig};
pub use error::{Error, Result};
pub use math::{Euler, Mat3, Quaternion, Vec3};
