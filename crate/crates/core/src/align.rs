//! Interlaced alignment: the filter tracks `C_{b(t)}^{b(0)}` and the gyro bias using
//! observations built with the current `C_b^n(0)`, and the optimizer re-solves `C_b^n(0)` and
//! the accelerometer bias from observations built with the filter's attitude history.
//!
//! Schedule, for a stream sampled at `dt`:
//! - every sample: propagate the filter and accumulate the open window;
//! - every `t_obs`: close an [`ObservationTriple`], form the body pair and update the filter;
//! - every `t_opt`: rebuild all closed windows from the cached samples, re-integrating the gyro
//!   with the current bias estimate from `C_{b(0)}^{b(0)} = I`, then re-solve and emit a
//!   snapshot. A final snapshot is emitted at the end of the stream.
//!
//! The full attitude composes as `C_b^n(t) = C_{n(0)}^{n(t)} C_b^n(0) C_{b(t)}^{b(0)}`.

use serde::{Deserialize, Serialize};

use crate::earth::{nav_history, omega_ie_n, EarthParams, NavRotation};
use crate::error::{Error, Result};
use crate::math::{exp_so3, Mat3, Quaternion, Vec3};
use crate::mekf::{self, FilterState, NoiseParams};
use crate::optimizer::{solve_attitude, solve_attitude_unbiased, AlignmentProblem};
use crate::vecobs::{
    accumulate_beta, make_body_pair, validate_stream, AlphaChiAccumulator, ImuSample,
    ObservationTriple, VelocitySample,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaaConfig {
    /// IMU period, s.
    pub dt: f64,
    /// Observation window length, s.
    pub t_obs: f64,
    /// Re-optimization period, s.
    pub t_opt: f64,
    pub earth: EarthParams,
    pub noise: NoiseParams,
    /// Samples beyond this many seconds after the first are ignored.
    pub max_duration: f64,
}

impl Default for SaaConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_obs: 1.0,
            t_opt: 10.0,
            earth: EarthParams::default(),
            noise: NoiseParams::default(),
            max_duration: 3600.0,
        }
    }
}

impl SaaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::NonPositiveDt(self.dt));
        }
        if !(self.t_obs >= self.dt) || !(self.t_opt >= self.t_obs) {
            return Err(Error::InvalidConfig(
                "schedule requires dt <= t_obs <= t_opt".into(),
            ));
        }
        if !(self.max_duration > 0.0) {
            return Err(Error::InvalidConfig("max_duration must be positive".into()));
        }
        self.earth.validate()?;
        self.noise.validate()
    }

    /// Samples per observation window.
    pub fn window_len(&self) -> usize {
        ((self.t_obs / self.dt).round() as usize).max(1)
    }

    /// Observation windows per re-optimization.
    pub fn windows_per_opt(&self) -> usize {
        ((self.t_opt / self.t_obs).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub residual_rms: f64,
    pub lambda: f64,
    pub chi_condition: f64,
    /// RMS innovation of the filter updates since the previous snapshot, m/s.
    pub innovation_rms: f64,
    /// Filter updates rejected by the innovation gate since the previous snapshot.
    pub rejected_updates: usize,
    /// Whether the last optimization found the accelerometer bias observable and significant;
    /// otherwise the bias-free solution is in use and `b_a` is zero.
    pub bias_valid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentSolution {
    /// `C_b^n(0)`
    pub c_bn0: Mat3,
    /// Accelerometer bias, additive (`measured = true + b_a`), m/s^2.
    pub b_a: Vec3,
    /// Gyro bias, additive, rad/s.
    pub b_g: Vec3,
    /// `C_{b(t)}^{b(0)}`
    pub c_b0_bt: Mat3,
    /// `C_b^n(t)`
    pub c_bn_t: Mat3,
    pub t: f64,
    pub diagnostics: Diagnostics,
}

/// Body attitudes `C_{b(t_k)}^{b(0)}` for `k = 0..=samples.len()` from gyro integration with a
/// constant bias, anchored at identity.
pub fn integrate_gyro(samples: &[ImuSample], gyro_bias: &Vec3, dt: f64) -> Vec<Mat3> {
    let mut out = Vec::with_capacity(samples.len() + 1);
    let mut q = Quaternion::identity();
    out.push(q.dcm());
    for s in samples {
        let dq = Quaternion::from_rotation_vector(&((s.gyro - gyro_bias) * dt));
        // unit by construction; renormalize to stop drift
        q = dq.mul(&q);
        q = q.normalize().unwrap_or(q);
        out.push(q.dcm());
    }
    out
}

/// Observation triples for consecutive windows, with `alpha`/`chi` accumulated along
/// `attitudes` (one per sample) and the given `betas`.
fn build_triples(
    samples: &[ImuSample],
    attitudes: &[Mat3],
    gyro_bias: &Vec3,
    betas: &[Vec3],
    cfg: &SaaConfig,
    t0: f64,
) -> Result<Vec<ObservationTriple>> {
    let n = cfg.window_len();
    betas
        .iter()
        .enumerate()
        .map(|(j, beta)| {
            let mut acc = AlphaChiAccumulator::new(cfg.dt);
            for k in j * n..(j + 1) * n {
                acc.push(&samples[k], &attitudes[k], gyro_bias);
            }
            let (alpha, chi) = acc.finish()?;
            Ok(ObservationTriple {
                alpha,
                chi,
                beta: *beta,
                t_start: t0 + (j * n) as f64 * cfg.dt,
                t_end: t0 + ((j + 1) * n) as f64 * cfg.dt,
            })
        })
        .collect()
}

struct Prepared<'a> {
    samples: &'a [ImuSample],
    nav: Vec<NavRotation>,
    betas: Vec<Vec3>,
    t0: f64,
}

fn prepare<'a>(
    imu: &'a [ImuSample],
    vel: Option<&[VelocitySample]>,
    cfg: &SaaConfig,
    min_windows: usize,
) -> Result<Prepared<'a>> {
    cfg.validate()?;
    let t0 = imu
        .first()
        .map(|s| s.t)
        .ok_or_else(|| Error::InsufficientData("empty IMU stream".into()))?;
    let limit = (cfg.max_duration / cfg.dt).round() as usize;
    let imu = &imu[..imu.len().min(limit)];
    validate_stream(imu, cfg.dt)?;

    let n = cfg.window_len();
    let windows = imu.len() / n;
    if windows < min_windows {
        return Err(Error::InsufficientData(format!(
            "{} complete windows of {} s available, {} required",
            windows, cfg.t_obs, min_windows
        )));
    }
    let samples = &imu[..windows * n];
    let nav = nav_history(&omega_ie_n(&cfg.earth), cfg.dt, samples.len() + 1)?;
    let betas = (0..windows)
        .map(|j| {
            let window = ((j * n) as f64 * cfg.dt, ((j + 1) * n) as f64 * cfg.dt);
            accumulate_beta(&nav, vel, &cfg.earth, window, cfg.dt)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Prepared {
        samples,
        nav,
        betas,
        t0,
    })
}

/// Initial `C_b^n(0)` ignoring sensor biases: gyro-only attitudes, eigenvalue solution with the
/// translation forced to zero. Uses the first `t_opt` of data (at least two windows).
pub fn bootstrap(imu: &[ImuSample], cfg: &SaaConfig) -> Result<Mat3> {
    let prep = prepare(imu, None, cfg, 2)?;
    bootstrap_prepared(&prep, cfg)
}

fn bootstrap_prepared(prep: &Prepared<'_>, cfg: &SaaConfig) -> Result<Mat3> {
    let windows = prep.betas.len().min(cfg.windows_per_opt().max(2));
    let n = cfg.window_len();
    let samples = &prep.samples[..windows * n];
    let zero = Vec3::zeros();
    let attitudes = integrate_gyro(samples, &zero, cfg.dt);
    let triples = build_triples(samples, &attitudes, &zero, &prep.betas[..windows], cfg, prep.t0)?;
    let q = solve_attitude_unbiased(&AlignmentProblem::from_triples(&triples))?;
    Ok(q.dcm())
}

#[derive(Default)]
struct InnovationStats {
    sum_sq: f64,
    count: usize,
    rejected: usize,
}

impl InnovationStats {
    fn rms(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.sum_sq / (3 * self.count) as f64).sqrt()
        }
    }
}

struct Optimum {
    c_bn0: Mat3,
    /// Correction in the `C (alpha + chi b) = beta` convention.
    bias_correction: Vec3,
    residual_rms: f64,
    lambda: f64,
    chi_condition: f64,
    bias_valid: bool,
}

/// Chi-square(3) quantile at 0.999: the drop in residual, in units of the measurement variance,
/// that the three bias parameters must buy before the biased solution replaces the unbiased one.
pub const BIAS_SIGNIFICANCE: f64 = 16.27;

/// Sum over windows of `|beta - C (alpha + chi b)|^2` with each window's own `chi`.
fn residual_sum(triples: &[ObservationTriple], c: &Mat3, b: &Vec3) -> f64 {
    triples
        .iter()
        .map(|t| (t.beta - c * (t.alpha + t.chi * b)).norm_squared())
        .sum()
}

fn reoptimize(
    prep: &Prepared<'_>,
    windows: usize,
    gyro_bias: &Vec3,
    cfg: &SaaConfig,
) -> Result<Optimum> {
    let n = cfg.window_len();
    let samples = &prep.samples[..windows * n];
    let attitudes = integrate_gyro(samples, gyro_bias, cfg.dt);
    let triples = build_triples(samples, &attitudes, gyro_bias, &prep.betas[..windows], cfg, prep.t0)?;
    let problem = AlignmentProblem::from_triples(&triples);
    let res = solve_attitude(&problem)?;
    let unbiased = solve_attitude_unbiased(&problem)?.dcm();

    let zero = Vec3::zeros();
    let sigma2 = cfg.noise.r_meas.trace() / 3.0;
    let j_unbiased = residual_sum(&triples, &unbiased, &zero);
    let significant = res.b_a.is_some_and(|b| {
        let gain = j_unbiased - residual_sum(&triples, &res.dcm(), &b);
        gain > BIAS_SIGNIFICANCE * sigma2
    });
    let (c_bn0, bias_correction) = match res.b_a {
        Some(b) if significant => (res.dcm(), b),
        _ => (unbiased, zero),
    };
    Ok(Optimum {
        c_bn0,
        bias_correction,
        residual_rms: res.residual_rms,
        lambda: res.lambda,
        chi_condition: res.chi_condition,
        bias_valid: significant,
    })
}

/// Propagates the filter through window `j` and applies its update. Returns the new state, the
/// update outcome and the window end time.
fn filter_window(
    filter: &FilterState,
    prep: &Prepared<'_>,
    j: usize,
    opt: &Optimum,
    cfg: &SaaConfig,
) -> Result<(FilterState, mekf::UpdateInfo, f64)> {
    let n = cfg.window_len();
    let mut filter = *filter;
    let mut acc = AlphaChiAccumulator::new(cfg.dt);
    for sample in &prep.samples[j * n..(j + 1) * n] {
        acc.push(sample, &mekf::attitude(&filter), &filter.b_g);
        filter = mekf::propagate(&filter, &sample.gyro, cfg.dt, &cfg.noise)?;
    }
    let (alpha, chi) = acc.finish()?;
    let triple = ObservationTriple {
        // the filter sees the bias-corrected integral so that C_{b(t)}^{b(0)} alpha_m = beta_m
        alpha: alpha + chi * opt.bias_correction,
        chi,
        beta: prep.betas[j],
        t_start: prep.t0 + (j * n) as f64 * cfg.dt,
        t_end: prep.t0 + ((j + 1) * n) as f64 * cfg.dt,
    };
    let pair = make_body_pair(&triple, &mekf::attitude(&filter), &opt.c_bn0)?;
    let (next, info) = mekf::update_detailed(&filter, &pair, &cfg.noise)?;
    Ok((next, info, triple.t_end))
}

/// Runs the interlaced estimator over a uniformly sampled stream. `vel`, when present, holds
/// `v^n` on the same time grid (one more sample than the IMU stream); without it the base is
/// treated as static.
pub fn run_alignment(
    imu: &[ImuSample],
    vel: Option<&[VelocitySample]>,
    cfg: &SaaConfig,
) -> Result<Vec<AlignmentSolution>> {
    let prep = prepare(imu, vel, cfg, cfg.windows_per_opt())?;
    let n = cfg.window_len();
    let per_opt = cfg.windows_per_opt();
    let windows = prep.betas.len();

    let mut opt = Optimum {
        c_bn0: bootstrap_prepared(&prep, cfg)?,
        bias_correction: Vec3::zeros(),
        residual_rms: 0.0,
        lambda: 0.0,
        chi_condition: 0.0,
        bias_valid: false,
    };
    let mut filter: FilterState = mekf::init(&cfg.noise);
    let mut stats = InnovationStats::default();
    let mut out = Vec::new();

    for j in 0..windows {
        let (next, info, t_end) = filter_window(&filter, &prep, j, &opt, cfg)?;
        filter = next;
        stats.sum_sq += info.innovation.norm_squared();
        stats.count += 1;
        if !info.accepted {
            stats.rejected += 1;
        }

        let closed = j + 1;
        if closed % per_opt == 0 || closed == windows {
            opt = reoptimize(&prep, closed, &filter.b_g, cfg)?;
            let nav = prep.nav[closed * n].c_n0_nt;
            let c_b0_bt = mekf::attitude(&filter);
            out.push(AlignmentSolution {
                c_bn0: opt.c_bn0,
                b_a: Vec3::zeros() - opt.bias_correction,
                b_g: filter.b_g,
                c_b0_bt,
                c_bn_t: nav.transpose() * opt.c_bn0 * c_b0_bt,
                t: t_end,
                diagnostics: Diagnostics {
                    residual_rms: opt.residual_rms,
                    lambda: opt.lambda,
                    chi_condition: opt.chi_condition,
                    innovation_rms: stats.rms(),
                    rejected_updates: stats.rejected,
                    bias_valid: opt.bias_valid,
                },
            });
            stats = InnovationStats::default();
        }
    }
    Ok(out)
}

/// `C_{n(t)}^{n(0)}` for a static base at time `t` after the start.
pub fn nav_rotation_at(earth: &EarthParams, t: f64) -> Mat3 {
    exp_so3(&(omega_ie_n(earth) * t))
}
