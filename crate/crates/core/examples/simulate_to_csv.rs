//! Simulate, align and evaluate through files, as the command-line tool does.

use saa::cli::{cmd_align, cmd_eval, cmd_simulate};
use saa::io::RunConfig;

fn main() -> saa::Result<()> {
    let cfg = RunConfig::parse(
        r#"
        scenario = "rocking"
        latitude_deg = 30.0
        yaw_deg = -60.0
        duration = 60.0
        accel_noise_ug_sqrt_hz = 20.0
        gyro_arw_deg_sqrt_h = 0.005
        seed = 3
        "#,
    )?;
    let dir = std::env::temp_dir().join("saa_example");
    cmd_simulate(&cfg, &dir)?;
    let summary = cmd_align(&dir.join("imu.csv"), Some(&dir.join("truth.csv")), Some(&cfg), &dir.join("out"))?;
    println!("{}", summary.headline());
    print!("{}", cmd_eval(&dir.join("out/results.csv"), &dir.join("truth.csv"))?.table());
    println!("files in {}", dir.display());
    Ok(())
}
