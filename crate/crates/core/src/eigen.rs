//! Cyclic Jacobi eigendecomposition for small dense symmetric matrices.

use nalgebra::{SMatrix, SVector};

/// Eigenpairs sorted by ascending eigenvalue; eigenvectors are the matrix columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<const N: usize> {
    pub values: SVector<f64, N>,
    pub vectors: SMatrix<f64, N, N>,
}

const MAX_SWEEPS: usize = 64;

/// Only the upper triangle of `a` is read; the input is treated as exactly symmetric.
pub fn symmetric_eigen<const N: usize>(a: &SMatrix<f64, N, N>) -> SymmetricEigen<N> {
    let mut m = *a;
    for i in 0..N {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
    let mut v = SMatrix::<f64, N, N>::identity();
    let scale = m.abs().max();
    if scale == 0.0 {
        return SymmetricEigen {
            values: SVector::zeros(),
            vectors: v,
        };
    }

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..N)
            .flat_map(|i| ((i + 1)..N).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off <= (1e-20 * scale) * (1e-20 * scale) {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                // theta.signum() is 1 for +0.0, so t is well defined when the diagonal ties
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..N {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..N {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..N).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let mut values = SVector::<f64, N>::zeros();
    let mut vectors = SMatrix::<f64, N, N>::zeros();
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = m[(src, src)];
        vectors.set_column(dst, &v.column(src));
    }
    SymmetricEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;

    #[test]
    fn diagonal_is_sorted() {
        let a = Matrix4::from_diagonal(&nalgebra::Vector4::new(3.0, -1.0, 2.0, 0.5));
        let e = symmetric_eigen(&a);
        assert_eq!(e.values.as_slice(), &[-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn reconstructs_and_matches_reference() {
        let b = Matrix4::new(
            1.0, 2.0, -0.5, 0.3, 0.7, -1.1, 0.2, 0.9, 0.4, 0.0, 1.5, -0.8, 2.2, 0.1, -0.3, 0.6,
        );
        let a = b.transpose() * b;
        let e = symmetric_eigen(&a);
        let rebuilt = e.vectors * Matrix4::from_diagonal(&e.values) * e.vectors.transpose();
        assert!((rebuilt - a).norm() < 1e-12 * a.norm());
        assert!((e.vectors.transpose() * e.vectors - Matrix4::identity()).norm() < 1e-14);
        let mut reference: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for (x, y) in e.values.iter().zip(reference) {
            assert!((x - y).abs() < 1e-12 * a.norm());
        }
    }

    #[test]
    fn zero_matrix() {
        let e = symmetric_eigen(&Matrix4::<f64>::zeros());
        assert_eq!(e.values.norm(), 0.0);
    }
}
