//! Registers a noisy, biased 3D point cloud with the closed-form eigenvalue optimizer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use saa::math::{rotation_angle, Euler, HomVec, Mat3, Vec3};
use saa::optimizer::{solve_attitude, solve_attitude_unbiased, AlignmentProblem, Observation};

fn main() -> saa::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut sample = || Vec3::from_fn(|_, _| normal.sample(&mut rng));

    let c = Euler::new(1.1, -0.3, 0.4).to_dcm();
    let bias = Vec3::new(0.02, -0.01, 0.03);
    let observations = (0..50)
        .map(|_| {
            let p = sample() * 5.0;
            let chi = Mat3::identity();
            Observation {
                y: HomVec::point(c * (p + chi * bias) + sample() * 1e-3),
                p: HomVec::point(p),
                chi,
                w: 1.0,
            }
        })
        .collect();
    let problem = AlignmentProblem { observations };

    let res = solve_attitude(&problem)?;
    println!("attitude error  {:.3e} deg", rotation_angle(&res.dcm(), &c).to_degrees());
    println!("bias estimate   {:?}", res.bias()?.as_slice());
    println!("lambda          {:.3e}", res.lambda);
    println!("residual rms    {:.3e}", res.residual_rms);
    let q = solve_attitude_unbiased(&problem)?;
    println!("unbiased fit    {:.3e} deg", rotation_angle(&q.dcm(), &c).to_degrees());
    Ok(())
}
