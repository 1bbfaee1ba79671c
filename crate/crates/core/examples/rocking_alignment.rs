//! Rocking-base alignment with gyro bias and sensor noise; prints the yaw error and bias
//! estimate at every re-optimization.

use saa::io::DEG_PER_HOUR;
use saa::math::{attitude_error, Euler, Vec3};
use saa::sim::{corrupt, generate_truth, ScenarioConfig, SensorErrors};
use saa::{run_alignment, SaaConfig};

fn main() -> saa::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let att = Euler::new(30f64.to_radians(), 2f64.to_radians(), -1f64.to_radians());
    let sc = ScenarioConfig::rocking_base(45f64.to_radians(), att, 600.0, 0.01);
    let (gyro_std, accel_std) = SensorErrors::stds_from_densities(0.01, 50.0, sc.earth.gravity_mag, sc.dt);
    let errs = SensorErrors {
        gyro_bias: Vec3::repeat(10.0 * DEG_PER_HOUR),
        accel_bias: Vec3::zeros(),
        gyro_noise_std: gyro_std,
        accel_noise_std: accel_std,
    };
    let imu = corrupt(&generate_truth(&sc)?, &errs, seed)?;
    let cfg = SaaConfig { dt: sc.dt, earth: sc.earth, ..SaaConfig::default() };

    for s in run_alignment(&imu, None, &cfg)?.iter().step_by(6) {
        let e = attitude_error(&s.c_bn_t, &sc.attitude_at(s.t));
        let bg = s.b_g / DEG_PER_HOUR;
        println!(
            "t={:4.0} s  yaw err {:+8.4} deg  b_g [{:+7.2} {:+7.2} {:+7.2}] deg/h  rejected {}",
            s.t,
            e.yaw.to_degrees(),
            bg.x,
            bg.y,
            bg.z,
            s.diagnostics.rejected_updates
        );
    }
    Ok(())
}
