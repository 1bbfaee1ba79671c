//! File formats: flat TOML run configuration, IMU/truth/results CSV.
//!
//! Numbers are written with 17 significant digits so that a write/read round trip is exact.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::align::{AlignmentSolution, SaaConfig};
use crate::earth::{EarthParams, EARTH_RATE, STANDARD_GRAVITY};
use crate::error::{Error, Result};
use crate::math::{dcm_to_quat, Euler, Mat3, Quaternion, Vec3};
use crate::mekf::NoiseParams;
use crate::sim::{ScenarioConfig, ScenarioKind, SensorErrors, TruthSample};
use crate::vecobs::ImuSample;

pub const IMU_HEADER: [&str; 7] = ["t", "gx", "gy", "gz", "fx", "fy", "fz"];
pub const TRUTH_HEADER: [&str; 11] = [
    "t", "qx", "qy", "qz", "qw", "bgx", "bgy", "bgz", "bax", "bay", "baz",
];
pub const RESULTS_HEADER: [&str; 13] = [
    "t",
    "yaw_deg",
    "pitch_deg",
    "roll_deg",
    "bgx_deg_h",
    "bgy_deg_h",
    "bgz_deg_h",
    "bax",
    "bay",
    "baz",
    "residual_rms",
    "lambda",
    "innovation_rms",
];

/// One degree per hour in rad/s.
pub const DEG_PER_HOUR: f64 = std::f64::consts::PI / 180.0 / 3600.0;

/// Run configuration. Every key is optional; unknown keys are rejected.
///
/// Conventions are fixed: ENU navigation frame, right-forward-up body, `C_b^n = Rz Rx Ry`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Must be "enu" when given.
    pub frame: String,
    pub scenario: ScenarioKind,
    pub latitude_deg: f64,
    pub earth_rate: f64,
    pub gravity: f64,
    pub yaw_deg: f64,
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub rocking_amplitude_deg: [f64; 3],
    pub rocking_frequency_hz: [f64; 3],
    pub rocking_phase_rad: [f64; 3],
    pub duration: f64,
    pub dt: f64,
    pub seed: u64,

    pub gyro_bias_deg_h: [f64; 3],
    pub accel_bias: [f64; 3],
    pub gyro_arw_deg_sqrt_h: f64,
    pub accel_noise_ug_sqrt_hz: f64,

    pub t_obs: f64,
    pub t_opt: f64,
    pub max_duration: f64,
    pub filter_arw_deg_sqrt_h: f64,
    pub filter_bias_walk: f64,
    pub filter_accel_noise_ug_sqrt_hz: f64,
    pub filter_p0_att_deg: f64,
    pub filter_p0_bias_deg_h: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            frame: "enu".into(),
            scenario: ScenarioKind::Static,
            latitude_deg: 45.0,
            earth_rate: EARTH_RATE,
            gravity: STANDARD_GRAVITY,
            yaw_deg: 0.0,
            pitch_deg: 0.0,
            roll_deg: 0.0,
            rocking_amplitude_deg: [5.0, 3.0, 4.0],
            rocking_frequency_hz: [0.1, 0.15, 0.2],
            rocking_phase_rad: [0.0, 0.7, 1.9],
            duration: 60.0,
            dt: 0.01,
            seed: 0,
            gyro_bias_deg_h: [0.0; 3],
            accel_bias: [0.0; 3],
            gyro_arw_deg_sqrt_h: 0.0,
            accel_noise_ug_sqrt_hz: 0.0,
            t_obs: 1.0,
            t_opt: 10.0,
            max_duration: 3600.0,
            filter_arw_deg_sqrt_h: 0.01,
            filter_bias_walk: 1e-9,
            filter_accel_noise_ug_sqrt_hz: 50.0,
            filter_p0_att_deg: 1e-12f64.sqrt().to_degrees(),
            filter_p0_bias_deg_h: 20.0,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn check(&self) -> Result<()> {
        if !self.frame.eq_ignore_ascii_case("enu") {
            return Err(Error::InvalidConfig(format!(
                "unsupported frame '{}', only 'enu'",
                self.frame
            )));
        }
        if self.gyro_arw_deg_sqrt_h < 0.0 || self.accel_noise_ug_sqrt_hz < 0.0 {
            return Err(Error::InvalidConfig("noise densities must be nonnegative".into()));
        }
        self.scenario(self.seed).validate()?;
        self.saa().validate()
    }

    pub fn earth(&self) -> EarthParams {
        EarthParams {
            earth_rate: self.earth_rate,
            gravity_mag: self.gravity,
            latitude: self.latitude_deg.to_radians(),
        }
    }

    pub fn scenario(&self, seed: u64) -> ScenarioConfig {
        let att = Euler::new(
            self.yaw_deg.to_radians(),
            self.pitch_deg.to_radians(),
            self.roll_deg.to_radians(),
        );
        let mut s = match self.scenario {
            ScenarioKind::Static => ScenarioConfig::static_base(0.0, att, self.duration, self.dt),
            ScenarioKind::Rocking => {
                let mut s = ScenarioConfig::rocking_base(0.0, att, self.duration, self.dt);
                s.amplitudes = Vec3::from(self.rocking_amplitude_deg).map(f64::to_radians);
                s.frequencies = Vec3::from(self.rocking_frequency_hz);
                s.phases = Vec3::from(self.rocking_phase_rad);
                s
            }
        };
        s.earth = self.earth();
        s.seed = seed;
        s
    }

    pub fn sensor_errors(&self) -> SensorErrors {
        let (gyro_std, accel_std) = SensorErrors::stds_from_densities(
            self.gyro_arw_deg_sqrt_h,
            self.accel_noise_ug_sqrt_hz,
            self.gravity,
            self.dt,
        );
        SensorErrors {
            gyro_bias: Vec3::from(self.gyro_bias_deg_h) * DEG_PER_HOUR,
            accel_bias: Vec3::from(self.accel_bias),
            gyro_noise_std: gyro_std,
            accel_noise_std: accel_std,
        }
    }

    pub fn saa(&self) -> SaaConfig {
        let accel_density = self.filter_accel_noise_ug_sqrt_hz * 1e-6 * self.gravity;
        SaaConfig {
            dt: self.dt,
            t_obs: self.t_obs,
            t_opt: self.t_opt,
            earth: self.earth(),
            noise: NoiseParams {
                sigma_gv: self.filter_arw_deg_sqrt_h.to_radians() / 60.0,
                sigma_gu: self.filter_bias_walk,
                r_meas: NoiseParams::r_from_accel_density(accel_density, self.t_obs),
                p0_att: self.filter_p0_att_deg.to_radians().powi(2),
                p0_bias: (self.filter_p0_bias_deg_h * DEG_PER_HOUR).powi(2),
            },
            max_duration: self.max_duration,
        }
    }
}

fn num(x: f64) -> String {
    format!("{:.16e}", x)
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_io = |e: csv::Error| Error::Io(e.into());
    w.write_record(header).map_err(to_io)?;
    for row in rows {
        w.write_record(row.into_iter().map(num)).map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a CSV with the exact `header` into rows of numbers. Rows and columns in errors are
/// 1-based, with the header as row 1.
fn read_rows<R: Read>(input: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Format {
            row,
            column: 0,
            message: e.to_string(),
        })?;
        if rec.len() != header.len() {
            return Err(Error::Format {
                row,
                column: rec.len().min(header.len()) + 1,
                message: format!("expected {} columns, found {}", header.len(), rec.len()),
            });
        }
        if row == 1 {
            if let Some(c) = header.iter().zip(rec.iter()).position(|(h, f)| *h != f) {
                return Err(Error::Format {
                    row,
                    column: c + 1,
                    message: format!("header '{}' expected, found '{}'", header[c], &rec[c]),
                });
            }
            seen_header = true;
            continue;
        }
        let vals = rec
            .iter()
            .enumerate()
            .map(|(c, f)| {
                f.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Format {
                        row,
                        column: c + 1,
                        message: format!("'{}' is not a finite number", f),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(vals);
    }
    if !seen_header {
        return Err(Error::Format {
            row: 1,
            column: 1,
            message: "missing header".into(),
        });
    }
    Ok(rows)
}

pub fn write_imu<W: Write>(out: W, samples: &[ImuSample]) -> Result<()> {
    write_rows(
        out,
        &IMU_HEADER,
        samples.iter().map(|s| {
            vec![s.t, s.gyro.x, s.gyro.y, s.gyro.z, s.accel.x, s.accel.y, s.accel.z]
        }),
    )
}

pub fn read_imu<R: Read>(input: R) -> Result<Vec<ImuSample>> {
    Ok(read_rows(input, &IMU_HEADER)?
        .into_iter()
        .map(|r| ImuSample {
            t: r[0],
            gyro: Vec3::new(r[1], r[2], r[3]),
            accel: Vec3::new(r[4], r[5], r[6]),
        })
        .collect())
}

/// One truth record: time, attitude `C_b^n(t)` and the constant sensor biases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthRecord {
    pub t: f64,
    pub q: Quaternion,
    pub gyro_bias: Vec3,
    pub accel_bias: Vec3,
}

impl TruthRecord {
    pub fn dcm(&self) -> Mat3 {
        self.q.dcm()
    }
}

/// Truth records at every IMU sample time plus the end of the last interval.
pub fn truth_records(
    cfg: &ScenarioConfig,
    truth: &[TruthSample],
    errs: &SensorErrors,
) -> Result<Vec<TruthRecord>> {
    let end = truth.len() as f64 * cfg.dt;
    truth
        .iter()
        .map(|s| (s.t, s.c_bn))
        .chain(std::iter::once((end, cfg.attitude_at(end))))
        .map(|(t, c)| {
            Ok(TruthRecord {
                t,
                q: dcm_to_quat(&c)?,
                gyro_bias: errs.gyro_bias,
                accel_bias: errs.accel_bias,
            })
        })
        .collect()
}

pub fn write_truth<W: Write>(out: W, records: &[TruthRecord]) -> Result<()> {
    write_rows(
        out,
        &TRUTH_HEADER,
        records.iter().map(|r| {
            let g = r.gyro_bias;
            let a = r.accel_bias;
            vec![
                r.t, r.q.rho.x, r.q.rho.y, r.q.rho.z, r.q.eta, g.x, g.y, g.z, a.x, a.y, a.z,
            ]
        }),
    )
}

pub fn read_truth<R: Read>(input: R) -> Result<Vec<TruthRecord>> {
    read_rows(input, &TRUTH_HEADER)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let q = Quaternion::new(Vec3::new(r[1], r[2], r[3]), r[4])
                .normalize()
                .map_err(|e| Error::Format {
                    row: i + 2,
                    column: 2,
                    message: e.to_string(),
                })?;
            Ok(TruthRecord {
                t: r[0],
                q,
                gyro_bias: Vec3::new(r[5], r[6], r[7]),
                accel_bias: Vec3::new(r[8], r[9], r[10]),
            })
        })
        .collect()
}

/// One results row: a snapshot in output units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub t: f64,
    /// `C_b^n(t)`
    pub attitude: Euler,
    pub gyro_bias_deg_h: Vec3,
    pub accel_bias: Vec3,
    pub residual_rms: f64,
    pub lambda: f64,
    pub innovation_rms: f64,
}

impl From<&AlignmentSolution> for ResultRow {
    fn from(s: &AlignmentSolution) -> Self {
        Self {
            t: s.t,
            attitude: Euler::from_dcm(&s.c_bn_t),
            gyro_bias_deg_h: s.b_g / DEG_PER_HOUR,
            accel_bias: s.b_a,
            residual_rms: s.diagnostics.residual_rms,
            lambda: s.diagnostics.lambda,
            innovation_rms: s.diagnostics.innovation_rms,
        }
    }
}

pub fn write_results<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    write_rows(
        out,
        &RESULTS_HEADER,
        rows.iter().map(|r| {
            let (g, a) = (r.gyro_bias_deg_h, r.accel_bias);
            vec![
                r.t,
                r.attitude.yaw.to_degrees(),
                r.attitude.pitch.to_degrees(),
                r.attitude.roll.to_degrees(),
                g.x,
                g.y,
                g.z,
                a.x,
                a.y,
                a.z,
                r.residual_rms,
                r.lambda,
                r.innovation_rms,
            ]
        }),
    )
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    Ok(read_rows(input, &RESULTS_HEADER)?
        .into_iter()
        .map(|r| ResultRow {
            t: r[0],
            attitude: Euler::new(r[1].to_radians(), r[2].to_radians(), r[3].to_radians()),
            gyro_bias_deg_h: Vec3::new(r[4], r[5], r[6]),
            accel_bias: Vec3::new(r[7], r[8], r[9]),
            residual_rms: r[10],
            lambda: r[11],
            innovation_rms: r[12],
        })
        .collect())
}

pub fn open(path: &Path) -> Result<File> {
    Ok(File::open(path)?)
}

pub fn create(path: &Path) -> Result<File> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(File::create(path)?)
}
