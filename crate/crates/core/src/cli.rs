//! Command-line harness: `simulate`, `align`, `eval`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data-format error, 3 numerical
//! failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{run_alignment, AlignmentSolution, Diagnostics};
use crate::error::{Error, Result};
use crate::io::{self, ResultRow, RunConfig, TruthRecord, DEG_PER_HOUR};
use crate::math::{attitude_error, rotation_angle, Euler, Mat3, Vec3};
use crate::sim::{corrupt, generate_truth};
use crate::vecobs::MAX_JITTER;

/// Yaw error below which an alignment counts as converged, degrees.
pub const CONVERGED_YAW_DEG: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "saa", version, about = "Semi-analytic SINS alignment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate IMU and truth CSV files from a scenario config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Number of seeds; writes one seed_NNN subdirectory per seed.
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Run the alignment on an IMU CSV (or a batch directory with --seeds).
    Align {
        imu: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory for results.csv and summary.json.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Compare a results CSV against truth.
    Eval {
        results: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        seeds: Option<usize>,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_) | Error::ConfigParse(_) | Error::Io(_) => 1,
        Error::Format { .. }
        | Error::NonUniformSampling { .. }
        | Error::TimestampMismatch(_)
        | Error::MismatchedLengths { .. } => 2,
        _ => 3,
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { config, out, seeds } => {
            let cfg = RunConfig::load(&config)?;
            match seeds {
                None => cmd_simulate(&cfg, &out),
                Some(n) => seed_dirs(&out, n)
                    .par_iter()
                    .enumerate()
                    .try_for_each(|(i, dir)| {
                        let mut c = cfg.clone();
                        c.seed = cfg.seed + i as u64;
                        cmd_simulate(&c, dir)
                    }),
            }
        }
        Command::Align {
            imu,
            config,
            out,
            truth,
            seeds,
        } => {
            let cfg = config.as_deref().map(RunConfig::load).transpose()?;
            match seeds {
                None => {
                    let s = cmd_align(&imu, truth.as_deref(), cfg.as_ref(), &out)?;
                    println!("{}", s.headline());
                    Ok(())
                }
                Some(n) => {
                    let imu_dirs = seed_dirs(&imu, n);
                    let truth_dirs = truth.as_ref().map(|t| seed_dirs(t, n));
                    let summaries = (0..n)
                        .into_par_iter()
                        .map(|i| {
                            let t = truth_dirs.as_ref().map(|d| d[i].join("truth.csv"));
                            cmd_align(
                                &imu_dirs[i].join("imu.csv"),
                                t.as_deref(),
                                cfg.as_ref(),
                                &out.join(seed_name(i)),
                            )
                        })
                        .collect::<Result<Vec<_>>>()?;
                    print!("{}", batch_table(&summaries));
                    Ok(())
                }
            }
        }
        Command::Eval {
            results,
            truth,
            seeds,
        } => {
            let reports = match seeds {
                None => vec![cmd_eval(&results, &truth)?],
                Some(n) => {
                    let r = seed_dirs(&results, n);
                    let t = seed_dirs(&truth, n);
                    (0..n)
                        .map(|i| cmd_eval(&r[i].join("results.csv"), &t[i].join("truth.csv")))
                        .collect::<Result<Vec<_>>>()?
                }
            };
            for (i, r) in reports.iter().enumerate() {
                if reports.len() > 1 {
                    println!("# {}", seed_name(i));
                }
                print!("{}", r.table());
            }
            if reports.len() > 1 {
                print!("{}", aggregate_table(&reports));
            }
            Ok(())
        }
    }
}

fn seed_name(i: usize) -> String {
    format!("seed_{:03}", i)
}

fn seed_dirs(root: &Path, n: usize) -> Vec<PathBuf> {
    (0..n).map(|i| root.join(seed_name(i))).collect()
}

/// Writes `imu.csv` and `truth.csv` into `out` for the configured scenario and seed.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<()> {
    let scenario = cfg.scenario(cfg.seed);
    let errs = cfg.sensor_errors();
    let truth = generate_truth(&scenario)?;
    let imu = corrupt(&truth, &errs, cfg.seed)?;
    io::write_imu(io::create(&out.join("imu.csv"))?, &imu)?;
    let records = io::truth_records(&scenario, &truth, &errs)?;
    io::write_truth(io::create(&out.join("truth.csv"))?, &records)
}

/// A JSON-friendly value that may be missing (no truth supplied, or never reached).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Field<T> {
    Value(T),
    Unavailable(String),
}

impl<T> Field<T> {
    fn unavailable() -> Self {
        Field::Unavailable("unavailable".into())
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Field::Value(v) => Some(v),
            Field::Unavailable(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub snapshots: usize,
    pub t_final: f64,
    /// Final yaw, pitch, roll of `C_b^n(t)`, degrees.
    pub attitude_deg: [f64; 3],
    pub gyro_bias_deg_h: [f64; 3],
    pub accel_bias: [f64; 3],
    /// Final yaw, pitch, roll error, degrees.
    pub attitude_error_deg: Field<[f64; 3]>,
    pub rotation_error_deg: Field<f64>,
    pub accel_bias_error: Field<[f64; 3]>,
    pub gyro_bias_error_deg_h: Field<[f64; 3]>,
    /// First snapshot time after which the yaw error stays below 0.1 degrees.
    pub convergence_time_s: Field<f64>,
    pub diagnostics: Diagnostics,
}

impl RunSummary {
    pub fn new(solutions: &[AlignmentSolution], truth: Option<&[TruthRecord]>) -> Result<Self> {
        let last = solutions
            .last()
            .ok_or_else(|| Error::InsufficientData("no alignment snapshot".into()))?;
        let att = Euler::from_dcm(&last.c_bn_t);
        let mut s = Self {
            snapshots: solutions.len(),
            t_final: last.t,
            attitude_deg: euler_deg(&att),
            gyro_bias_deg_h: (last.b_g / DEG_PER_HOUR).into(),
            accel_bias: last.b_a.into(),
            attitude_error_deg: Field::unavailable(),
            rotation_error_deg: Field::unavailable(),
            accel_bias_error: Field::unavailable(),
            gyro_bias_error_deg_h: Field::unavailable(),
            convergence_time_s: Field::unavailable(),
            diagnostics: last.diagnostics,
        };
        let Some(truth) = truth else {
            return Ok(s);
        };
        let yaw_errors = solutions
            .iter()
            .map(|sol| {
                let rec = find_truth(truth, sol.t)?;
                Ok(attitude_error(&sol.c_bn_t, &rec.dcm()).yaw.to_degrees().abs())
            })
            .collect::<Result<Vec<_>>>()?;
        let rec = find_truth(truth, last.t)?;
        s.attitude_error_deg = Field::Value(euler_deg(&attitude_error(&last.c_bn_t, &rec.dcm())));
        s.rotation_error_deg = Field::Value(rotation_angle(&last.c_bn_t, &rec.dcm()).to_degrees());
        s.accel_bias_error = Field::Value((last.b_a - rec.accel_bias).into());
        s.gyro_bias_error_deg_h = Field::Value(((last.b_g - rec.gyro_bias) / DEG_PER_HOUR).into());
        s.convergence_time_s = match convergence_index(&yaw_errors, CONVERGED_YAW_DEG) {
            Some(k) => Field::Value(solutions[k].t),
            None => Field::Unavailable("not converged".into()),
        };
        Ok(s)
    }

    pub fn headline(&self) -> String {
        let [y, p, r] = self.attitude_deg;
        let mut line = format!(
            "t={:.2} s  yaw={:.6} pitch={:.6} roll={:.6} deg",
            self.t_final, y, p, r
        );
        if let Some([ey, ep, er]) = self.attitude_error_deg.value() {
            line += &format!("  error yaw={:.3e} pitch={:.3e} roll={:.3e} deg", ey, ep, er);
        }
        line
    }
}

fn euler_deg(e: &Euler) -> [f64; 3] {
    [e.yaw.to_degrees(), e.pitch.to_degrees(), e.roll.to_degrees()]
}

/// Index of the first element after which every value stays below `limit`.
fn convergence_index(values: &[f64], limit: f64) -> Option<usize> {
    let k = values.iter().rposition(|v| !(*v < limit)).map_or(0, |k| k + 1);
    (k < values.len()).then_some(k)
}

fn find_truth(truth: &[TruthRecord], t: f64) -> Result<&TruthRecord> {
    truth
        .iter()
        .find(|r| (r.t - t).abs() <= MAX_JITTER)
        .ok_or(Error::TimestampMismatch(t))
}

/// Sample period from the first two timestamps.
fn infer_dt(imu: &[crate::vecobs::ImuSample]) -> Result<f64> {
    match imu {
        [a, b, ..] => Ok(b.t - a.t),
        _ => Err(Error::InsufficientData("fewer than two IMU samples".into())),
    }
}

/// Aligns one IMU file and writes `results.csv` and `summary.json` into `out`.
pub fn cmd_align(
    imu_path: &Path,
    truth_path: Option<&Path>,
    cfg: Option<&RunConfig>,
    out: &Path,
) -> Result<RunSummary> {
    let imu = io::read_imu(io::open(imu_path)?)?;
    let mut saa = cfg.cloned().unwrap_or_default().saa();
    if cfg.is_none() {
        saa.dt = infer_dt(&imu)?;
    }
    let truth = truth_path
        .map(|p| io::read_truth(io::open(p)?))
        .transpose()?;
    let solutions = run_alignment(&imu, None, &saa)?;
    let rows: Vec<ResultRow> = solutions.iter().map(ResultRow::from).collect();
    io::write_results(io::create(&out.join("results.csv"))?, &rows)?;
    let summary = RunSummary::new(&solutions, truth.as_deref())?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.into()))?;
    std::fs::write(out.join("summary.json"), json + "\n")?;
    Ok(summary)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn batch_table(summaries: &[RunSummary]) -> String {
    let mut s = String::from("seed,yaw_err_deg,pitch_err_deg,roll_err_deg,bg_err_deg_h\n");
    let mut yaw = Vec::new();
    for (i, r) in summaries.iter().enumerate() {
        match (r.attitude_error_deg.value(), r.gyro_bias_error_deg_h.value()) {
            (Some(e), Some(g)) => {
                s += &format!(
                    "{},{:.6e},{:.6e},{:.6e},{:.6e}\n",
                    i,
                    e[0],
                    e[1],
                    e[2],
                    Vec3::from(*g).norm()
                );
                yaw.push(e[0].abs());
            }
            _ => s += &format!("{},unavailable,unavailable,unavailable,unavailable\n", i),
        }
    }
    if !yaw.is_empty() {
        s += &format!("median |yaw error| = {:.6e} deg\n", median(yaw));
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalEpoch {
    pub t: f64,
    pub rotation_error_deg: f64,
    pub attitude_error_deg: [f64; 3],
    pub gyro_bias_error_deg_h: Vec3,
    pub accel_bias_error: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub epochs: Vec<EvalEpoch>,
}

impl EvalReport {
    pub fn table(&self) -> String {
        let mut s = String::from(
            "t,rot_err_deg,yaw_err_deg,pitch_err_deg,roll_err_deg,bgx_err_deg_h,bgy_err_deg_h,bgz_err_deg_h,bax_err,bay_err,baz_err\n",
        );
        for e in &self.epochs {
            let [y, p, r] = e.attitude_error_deg;
            let (g, a) = (e.gyro_bias_error_deg_h, e.accel_bias_error);
            s += &format!(
                "{:.3},{:.9},{:.9},{:.9},{:.9},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n",
                e.t, e.rotation_error_deg, y, p, r, g.x, g.y, g.z, a.x, a.y, a.z
            );
        }
        s
    }

    pub fn last(&self) -> Option<&EvalEpoch> {
        self.epochs.last()
    }
}

/// Per-epoch errors of a results file against truth.
pub fn evaluate(rows: &[ResultRow], truth: &[TruthRecord]) -> Result<EvalReport> {
    let epochs = rows
        .iter()
        .map(|row| {
            let rec = find_truth(truth, row.t)?;
            let est: Mat3 = row.attitude.to_dcm();
            Ok(EvalEpoch {
                t: row.t,
                rotation_error_deg: rotation_angle(&est, &rec.dcm()).to_degrees(),
                attitude_error_deg: euler_deg(&attitude_error(&est, &rec.dcm())),
                gyro_bias_error_deg_h: row.gyro_bias_deg_h - rec.gyro_bias / DEG_PER_HOUR,
                accel_bias_error: row.accel_bias - rec.accel_bias,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport { epochs })
}

pub fn cmd_eval(results: &Path, truth: &Path) -> Result<EvalReport> {
    let rows = io::read_results(io::open(results)?)?;
    let truth = io::read_truth(io::open(truth)?)?;
    evaluate(&rows, &truth)
}

fn aggregate_table(reports: &[EvalReport]) -> String {
    let finals: Vec<&EvalEpoch> = reports.iter().filter_map(EvalReport::last).collect();
    let n = finals.len().max(1) as f64;
    let rms = |f: &dyn Fn(&EvalEpoch) -> f64| (finals.iter().map(|e| f(e).powi(2)).sum::<f64>() / n).sqrt();
    format!(
        "# aggregate over {} runs (final epoch)\nrms_rot_err_deg,rms_yaw_err_deg,rms_pitch_err_deg,rms_roll_err_deg,rms_bg_err_deg_h,rms_ba_err\n{:.9},{:.9},{:.9},{:.9},{:.6e},{:.6e}\n",
        finals.len(),
        rms(&|e| e.rotation_error_deg),
        rms(&|e| e.attitude_error_deg[0]),
        rms(&|e| e.attitude_error_deg[1]),
        rms(&|e| e.attitude_error_deg[2]),
        rms(&|e| e.gyro_bias_error_deg_h.norm()),
        rms(&|e| e.accel_bias_error.norm()),
    )
}
