//! Aligns a static IMU with an accelerometer bias and prints each snapshot.

use saa::math::{attitude_error, Euler, Vec3};
use saa::sim::{corrupt, generate_truth, ScenarioConfig, SensorErrors};
use saa::{run_alignment, SaaConfig};

fn main() -> saa::Result<()> {
    let att = Euler::new(30f64.to_radians(), 2f64.to_radians(), -1f64.to_radians());
    let sc = ScenarioConfig::static_base(45f64.to_radians(), att, 120.0, 0.01);
    let errs = SensorErrors { accel_bias: Vec3::new(0.0, 0.0, 1e-3), ..SensorErrors::default() };
    let imu = corrupt(&generate_truth(&sc)?, &errs, 0)?;
    let cfg = SaaConfig { dt: sc.dt, earth: sc.earth, ..SaaConfig::default() };

    for s in run_alignment(&imu, None, &cfg)? {
        let e = attitude_error(&s.c_bn_t, &sc.attitude_at(s.t));
        println!(
            "t={:5.0} s  err yaw {:+.2e} pitch {:+.2e} roll {:+.2e} deg  b_a z {:.4e}  biased fit {}",
            s.t,
            e.yaw.to_degrees(),
            e.pitch.to_degrees(),
            e.roll.to_degrees(),
            s.b_a.z,
            s.diagnostics.bias_valid
        );
    }
    Ok(())
}
