//! Joint estimation of the constant initial attitude `C_b^n(0)` and the accelerometer bias.
//!
//! Each observation window contributes homogeneous points `p_j = [alpha_j; 1]` (body frame at
//! `t = 0`) and `y_j = [beta_j; 1]` (navigation frame at `t = 0`), related by
//! `y_j = T(q) (p_j + r)` with `T(q) = (q^-1)^+ q^(+) = [C 0; 0 1]` and a translation
//! `r = [chi b_a; 0]` shared across windows. Minimizing
//!
//! ```text
//! J = 1/2 sum_j w_j |y_j - (q^-1)^+ (p_j + r)^+ q|^2 - 1/2 lambda (q^T q - 1)
//! ```
//!
//! over `r` gives `r = C^T y_bar - p_bar` from the weighted means; substituting back leaves
//! `W q = lambda q` with
//!
//! ```text
//! W = 1/w sum_j w_j ((y_j - y_bar)^(+) - (p_j - p_bar)^+)^T ((y_j - y_bar)^(+) - (p_j - p_bar)^+)
//! ```
//!
//! Since `J` is a residual, the optimum is the eigenvector of the *smallest* eigenvalue.

use crate::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::math::{HomVec, Mat3, Mat4, Quaternion, Vec3, Vec4};
use crate::vecobs::ObservationTriple;

/// Relative gap between the two smallest eigenvalues below which the attitude is unobservable.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Condition number of the mean `chi` above which the bias is reported as unobservable.
pub const MAX_CHI_CONDITION: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub y: HomVec,
    pub p: HomVec,
    pub chi: Mat3,
    pub w: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlignmentProblem {
    pub observations: Vec<Observation>,
}

impl AlignmentProblem {
    /// Builds a problem with uniform weights `1/M`.
    pub fn from_triples(triples: &[ObservationTriple]) -> Self {
        let w = 1.0 / triples.len().max(1) as f64;
        Self {
            observations: triples
                .iter()
                .map(|t| Observation {
                    y: HomVec::point(t.beta),
                    p: HomVec::point(t.alpha),
                    chi: t.chi,
                    w,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimResult {
    /// Unit quaternion of `C_b^n(0)`, canonical sign.
    pub q: Quaternion,
    /// Translation `r` recovered from the means (vector part).
    pub r: Vec3,
    /// Bias correction with `C (alpha + chi b_a) = beta`. `None` when the mean `chi` is too
    /// ill-conditioned to invert.
    pub b_a: Option<Vec3>,
    /// Smallest eigenvalue of `W`.
    pub lambda: f64,
    /// Weighted RMS of the homogeneous residuals at the optimum.
    pub residual_rms: f64,
    pub chi_condition: f64,
}

impl OptimResult {
    pub fn dcm(&self) -> Mat3 {
        self.q.dcm()
    }

    pub fn bias(&self) -> Result<Vec3> {
        self.b_a.ok_or(Error::IllConditionedChi {
            condition: self.chi_condition,
        })
    }
}

fn check_weights(problem: &AlignmentProblem) -> Result<f64> {
    if problem.is_empty() {
        return Err(Error::EmptyProblem);
    }
    let w: f64 = problem.observations.iter().map(|o| o.w).sum();
    if problem.observations.iter().any(|o| !(o.w > 0.0)) {
        return Err(Error::InvalidConfig("observation weights must be positive".into()));
    }
    Ok(w)
}

/// Weighted means of `y_j` and `p_j`, and the total weight.
pub fn weighted_means(problem: &AlignmentProblem) -> Result<(HomVec, HomVec, f64)> {
    let w = check_weights(problem)?;
    let (mut y, mut p) = (Vec3::zeros(), Vec3::zeros());
    for o in &problem.observations {
        y += o.w * o.y.v;
        p += o.w * o.p.v;
    }
    Ok((HomVec::point(y / w), HomVec::point(p / w), w))
}

fn pair_matrix(y: &Vec3, p: &Vec3) -> Mat4 {
    Quaternion::pure(*y).oplus() - Quaternion::pure(*p).plus()
}

pub fn build_w_matrix(problem: &AlignmentProblem) -> Result<Mat4> {
    let (y_bar, p_bar, w) = weighted_means(problem)?;
    let mut acc = Mat4::zeros();
    for o in &problem.observations {
        let m = pair_matrix(&(o.y.v - y_bar.v), &(o.p.v - p_bar.v));
        acc += o.w * m.transpose() * m;
    }
    Ok(symmetrize(&(acc / w)))
}

fn symmetrize(m: &Mat4) -> Mat4 {
    (m + m.transpose()) * 0.5
}

/// Unit eigenvector of the smallest eigenvalue, with the degeneracy check.
fn min_eigenvector(w: &Mat4) -> Result<(Quaternion, f64)> {
    let eig = symmetric_eigen(w);
    let scale = eig.values[3].abs().max(eig.values[0].abs());
    let gap = if scale > 0.0 {
        (eig.values[1] - eig.values[0]) / scale
    } else {
        0.0
    };
    if gap <= DEGENERACY_GAP {
        return Err(Error::DegenerateEigenspace { gap });
    }
    let v: Vec4 = eig.vectors.column(0).into_owned();
    let q = Quaternion::from_vec4(&v).normalize()?.canonical();
    Ok((q, eig.values[0]))
}

/// Condition number of a 3x3 matrix from its singular values.
pub fn condition_number(m: &Mat3) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn solve_attitude(problem: &AlignmentProblem) -> Result<OptimResult> {
    let (y_bar, p_bar, w) = weighted_means(problem)?;
    let wm = build_w_matrix(problem)?;
    let (q, lambda) = min_eigenvector(&wm)?;
    let c = q.dcm();
    let r = c.transpose() * y_bar.v - p_bar.v;

    let chi_bar = problem
        .observations
        .iter()
        .fold(Mat3::zeros(), |acc, o| acc + o.chi * o.w)
        / w;
    let chi_condition = condition_number(&chi_bar);
    let b_a = if chi_condition < MAX_CHI_CONDITION {
        chi_bar.lu().solve(&r)
    } else {
        None
    };

    let sq: f64 = problem
        .observations
        .iter()
        .map(|o| o.w * (o.y.v - c * (o.p.v + r)).norm_squared())
        .sum();
    Ok(OptimResult {
        q,
        r,
        b_a,
        lambda,
        residual_rms: (sq / w).sqrt(),
        chi_condition,
    })
}

/// Attitude alone, with the translation forced to zero:
/// minimizes `sum_j w_j |beta_j - C alpha_j|^2` through the uncentered analogue of `W`.
pub fn solve_attitude_unbiased(problem: &AlignmentProblem) -> Result<Quaternion> {
    let w = check_weights(problem)?;
    let mut acc = Mat4::zeros();
    for o in &problem.observations {
        let m = pair_matrix(&o.y.v, &o.p.v);
        acc += o.w * m.transpose() * m;
    }
    let (q, _) = min_eigenvector(&symmetrize(&(acc / w)))?;
    Ok(q)
}

/// Partial derivatives of the objective at `(q, r, lambda)` evaluated by direct formula:
/// `dJ/dq = sum w_j M_j^T M_j q - lambda q`, `dJ/dr = -(q^-1)^(+) sum w_j M_j q`,
/// `dJ/dlambda = -1/2 (q^T q - 1)`, with `M_j = y_j^(+) - (p_j + r)^+`.
pub fn objective_gradients(
    problem: &AlignmentProblem,
    q: &Quaternion,
    r: &Vec3,
    lambda: f64,
) -> (Vec4, Vec4, f64) {
    let qv = q.to_vec4();
    let rq = HomVec::translation(*r);
    let mut grad_q = Vec4::zeros();
    let mut sum_mq = Vec4::zeros();
    for o in &problem.observations {
        let shifted = Quaternion::new(o.p.v + rq.v, o.p.w + rq.w);
        let m = o.y.as_quaternion().oplus() - shifted.plus();
        let mq = m * qv;
        grad_q += o.w * m.transpose() * mq;
        sum_mq += o.w * mq;
    }
    grad_q -= lambda * qv;
    let grad_r = -(q.inverse().oplus() * sum_mq);
    (grad_q, grad_r, -0.5 * (qv.dot(&qv) - 1.0))
}
