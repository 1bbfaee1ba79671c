//! Tracks a tumbling body and estimates its gyro bias from vector pairs once per second.

use saa::math::{rotation_angle, Mat3, Quaternion, Vec3};
use saa::mekf::{attitude, init, propagate, update_detailed, NoiseParams};
use saa::vecobs::BodyObsPair;

fn main() -> saa::Result<()> {
    let noise = NoiseParams {
        sigma_gv: 1e-5,
        sigma_gu: 1e-8,
        r_meas: Mat3::identity() * 1e-6,
        p0_att: 1e-4,
        p0_bias: 1e-6,
    };
    let dt = 0.01;
    let bias = Vec3::new(3e-4, -2e-4, 1e-4);
    let refs = [Vec3::new(0.0, 0.0, -9.8), Vec3::new(3.0, 1.0, 0.0), Vec3::new(-1.0, 4.0, 2.0)];
    let mut s = init(&noise);
    let mut q_true = Quaternion::identity();
    for k in 1..=12_000 {
        let t = k as f64 * dt;
        let w = Vec3::new((0.2 * t).sin(), (0.3 * t).cos(), 0.5) * 0.1;
        q_true = Quaternion::from_rotation_vector(&(w * dt)).mul(&q_true);
        s = propagate(&s, &(w + bias), dt, &noise)?;
        if k % 100 == 0 {
            let beta_m = refs[(k / 100) % 3];
            let obs = BodyObsPair { alpha_m: q_true.dcm().transpose() * beta_m, beta_m, t };
            let (next, info) = update_detailed(&s, &obs, &noise)?;
            s = next;
            if k % 2000 == 0 {
                println!(
                    "t={:6.1} s  att err {:.2e} deg  bias err {:.2e} rad/s  innov {:.2e}",
                    t,
                    rotation_angle(&attitude(&s), &q_true.dcm()).to_degrees(),
                    (s.b_g - bias).norm(),
                    info.innovation.norm()
                );
            }
        }
    }
    Ok(())
}
