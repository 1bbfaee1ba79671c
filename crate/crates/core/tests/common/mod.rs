#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use saa::math::{attitude_error, Euler, Mat3, Quaternion, Vec3, Vec4};
use saa::optimizer::{AlignmentProblem, Observation};
use saa::sim::{corrupt, generate_truth, ScenarioConfig, SensorErrors};
use saa::vecobs::ImuSample;
use saa::{run_alignment, AlignmentSolution, SaaConfig};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal_vec3(r: &mut ChaCha8Rng) -> Vec3 {
    Vec3::from_fn(|_, _| StandardNormal.sample(r))
}

pub fn random_vec4(r: &mut ChaCha8Rng) -> Vec4 {
    Vec4::from_fn(|_, _| r.random_range(-1.0..1.0))
}

/// Uniformly distributed unit quaternion (normalized Gaussian 4-vector).
pub fn random_unit_quat(r: &mut ChaCha8Rng) -> Quaternion {
    let v = Vec4::from_fn(|_, _| StandardNormal.sample(r));
    Quaternion::from_vec4(&(v / v.norm()))
}

/// Weighted orthogonal Procrustes with a free translation, by SVD:
/// argmin_C sum w_j |(y_j - y) - C (p_j - p)|^2.
pub fn procrustes(problem: &AlignmentProblem) -> Mat3 {
    let w: f64 = problem.observations.iter().map(|o| o.w).sum();
    let y_bar = problem.observations.iter().map(|o| o.w * o.y.v).sum::<Vec3>() / w;
    let p_bar = problem.observations.iter().map(|o| o.w * o.p.v).sum::<Vec3>() / w;
    let h = problem
        .observations
        .iter()
        .map(|o| o.w * (o.p.v - p_bar) * (o.y.v - y_bar).transpose())
        .sum::<Mat3>();
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (vt.transpose() * u.transpose()).determinant().signum();
    vt.transpose() * Mat3::from_diagonal(&Vec3::new(1.0, 1.0, d)) * u.transpose()
}

/// Bias-free random cloud `beta_j = C alpha_j + noise` with `m` observations and random weights.
pub fn random_cloud(r: &mut ChaCha8Rng, m: usize, noise: f64) -> (AlignmentProblem, Mat3) {
    let c = random_unit_quat(r).dcm();
    let observations = (0..m)
        .map(|_| {
            let alpha = normal_vec3(r) * 5.0;
            let beta = c * alpha + normal_vec3(r) * noise;
            Observation {
                y: saa::math::HomVec::point(beta),
                p: saa::math::HomVec::point(alpha),
                chi: Mat3::identity(),
                w: r.random_range(0.1..2.0),
            }
        })
        .collect();
    (AlignmentProblem { observations }, c)
}

pub const LATITUDE_DEG: f64 = 45.0;

pub fn test_attitude() -> Euler {
    Euler::new(30f64.to_radians(), 2f64.to_radians(), (-1f64).to_radians())
}

pub struct ScenarioRun {
    pub scenario: ScenarioConfig,
    pub errors: SensorErrors,
    pub imu: Vec<ImuSample>,
    pub solutions: Vec<AlignmentSolution>,
    pub elapsed: std::time::Duration,
}

impl ScenarioRun {
    pub fn last(&self) -> &AlignmentSolution {
        self.solutions.last().expect("at least one snapshot")
    }

    /// Yaw, pitch, roll error of the final full attitude, degrees.
    pub fn final_error_deg(&self) -> [f64; 3] {
        let s = self.last();
        let e = attitude_error(&s.c_bn_t, &self.scenario.attitude_at(s.t));
        [e.yaw.to_degrees(), e.pitch.to_degrees(), e.roll.to_degrees()]
    }
}

pub fn run_scenario(scenario: ScenarioConfig, errors: SensorErrors, seed: u64) -> ScenarioRun {
    let truth = generate_truth(&scenario).unwrap();
    let imu = corrupt(&truth, &errors, seed).unwrap();
    let cfg = SaaConfig {
        dt: scenario.dt,
        earth: scenario.earth,
        ..SaaConfig::default()
    };
    let start = std::time::Instant::now();
    let solutions = run_alignment(&imu, None, &cfg).unwrap();
    let elapsed = start.elapsed();
    ScenarioRun {
        scenario,
        errors,
        imu,
        solutions,
        elapsed,
    }
}

pub fn scenario_a() -> ScenarioRun {
    let sc = ScenarioConfig::static_base(LATITUDE_DEG.to_radians(), test_attitude(), 60.0, 0.01);
    run_scenario(sc, SensorErrors::default(), 0)
}

pub fn scenario_b_errors() -> SensorErrors {
    SensorErrors {
        accel_bias: Vec3::new(1e-3, 1e-3, 1e-3),
        ..SensorErrors::default()
    }
}

pub fn scenario_b() -> ScenarioRun {
    let sc = ScenarioConfig::static_base(LATITUDE_DEG.to_radians(), test_attitude(), 300.0, 0.01);
    run_scenario(sc, scenario_b_errors(), 0)
}

pub fn scenario_c_errors() -> SensorErrors {
    let dt = 0.01;
    let (gyro_std, accel_std) = SensorErrors::stds_from_densities(0.01, 50.0, 9.80665, dt);
    SensorErrors {
        gyro_bias: Vec3::new(10.0, 10.0, 10.0) * (1f64.to_radians() / 3600.0),
        accel_bias: Vec3::zeros(),
        gyro_noise_std: gyro_std,
        accel_noise_std: accel_std,
    }
}

pub fn scenario_c(seed: u64) -> ScenarioRun {
    let mut sc = ScenarioConfig::rocking_base(LATITUDE_DEG.to_radians(), test_attitude(), 600.0, 0.01);
    sc.seed = seed;
    run_scenario(sc, scenario_c_errors(), seed)
}
