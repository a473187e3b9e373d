//! One-sided Jacobi (Hestenes) singular value decomposition.
//!
//! Only the right singular vectors are kept. They give null spaces and
//! ranks, which is all the canonicalizer and the eigenbasis builder need.

use crate::error::{Error, Result};
use crate::hermitian::JacobiRotation;
use crate::matrix::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// `A V = G` with mutually orthogonal columns `G`; the column norms of `G`
/// are the singular values.
#[derive(Clone, Debug)]
pub struct Svd<T> {
    /// Descending, one per column of `A` (wide matrices get trailing zeros).
    pub singular_values: Vec<T>,
    /// Right singular vectors as columns, in the same order.
    pub right_vectors: Matrix<T>,
}

impl<T: Real> Svd<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        let n = a.cols();
        let mut g = a.clone();
        let mut v = Matrix::identity(n);
        let eps = T::epsilon() * T::lit(a.rows().max(1) as f64).sqrt();
        // Column pairs whose coupling is below rounding level of the whole
        // matrix are left alone; rotating them only churns noise.
        let floor = {
            let f = eps * a.frobenius_norm();
            (f * f).max(T::min_positive_value())
        };
        let mut converged = n < 2;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = num_complex::Complex::new(T::zero(), T::zero());
                    for i in 0..g.rows() {
                        let gp = g[(i, p)];
                        let gq = g[(i, q)];
                        alpha += gp.norm_sqr();
                        beta += gq.norm_sqr();
                        gamma += gp.conj() * gq;
                    }
                    let ag = gamma.norm();
                    if ag <= eps * (alpha * beta).sqrt() || ag <= floor {
                        continue;
                    }
                    rotated = true;
                    let rot = JacobiRotation::annihilating(alpha, beta, gamma);
                    rot.apply_right(&mut g, p, q);
                    rot.apply_right(&mut v, p, q);
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence("one-sided Jacobi SVD"));
        }
        let norms: Vec<T> = (0..n)
            .map(|j| (0..g.rows()).map(|i| g[(i, j)].norm_sqr()).sum::<T>().sqrt())
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));
        Ok(Self {
            singular_values: order.iter().map(|&j| norms[j]).collect(),
            right_vectors: Matrix::from_fn(n, n, |i, j| v[(i, order[j])]),
        })
    }

    /// Number of singular values strictly above `tol`.
    pub fn rank(&self, tol: T) -> usize {
        self.singular_values.iter().filter(|&&s| s > tol).count()
    }

    /// Orthonormal basis (as columns) of the right singular vectors whose
    /// singular value is `<= tol`.
    pub fn null_space(&self, tol: T) -> Matrix<T> {
        let r = self.rank(tol);
        let n = self.right_vectors.rows();
        self.right_vectors.block(0, r, n, n - r)
    }
}

/// Singular values of `a`, descending, `min(rows, cols)` of them.
pub fn singular_values<T: Real>(a: &Matrix<T>) -> Result<Vec<T>> {
    let k = a.rows().min(a.cols());
    let s = if a.rows() >= a.cols() {
        Svd::new(a)?
    } else {
        Svd::new(&a.adjoint())?
    };
    Ok(s.singular_values.into_iter().take(k).collect())
}

/// Largest singular value (`0` for empty matrices).
pub fn spectral_norm<T: Real>(a: &Matrix<T>) -> Result<T> {
    Ok(singular_values(a)?.first().copied().unwrap_or_else(T::zero))
}

/// Orthonormal basis of `{x : A x = 0}` with singular values `<= tol` counted as zero.
pub fn null_space<T: Real>(a: &Matrix<T>, tol: T) -> Result<Matrix<T>> {
    Ok(Svd::new(a)?.null_space(tol))
}

/// Numerical rank with absolute threshold `tol`.
pub fn rank<T: Real>(a: &Matrix<T>, tol: T) -> Result<usize> {
    Ok(singular_values(a)?.iter().filter(|&&s| s > tol).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex;

    #[test]
    fn spectral_norm_examples() {
        let s = 0.5f64.sqrt();
        let u = Matrix::new(
            2,
            2,
            vec![
                Complex::new(s, 0.0),
                Complex::new(0.0, s),
                Complex::new(0.0, s),
                Complex::new(s, 0.0),
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(spectral_norm(&u).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(spectral_norm(&Matrix::from_diagonal(&[0.3, 0.7])).unwrap(), 0.7);
        let a = Matrix::from_real_rows(&[[9.0 / 25.0, 3.0 / 25.0], [0.0, 16.0 / 25.0]]).unwrap();
        // Oracle: largest root of s^4 - tr(A*A) s^2 + det(A)^2 = 0.
        let tr: f64 = (81.0 + 9.0 + 256.0) / 625.0;
        let det: f64 = 144.0 / 625.0;
        let oracle = ((tr + (tr * tr - 4.0 * det * det).sqrt()) / 2.0).sqrt();
        assert_abs_diff_eq!(spectral_norm(&a).unwrap(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle, 0.655_902_594_597_845, epsilon = 1e-14);
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = Matrix::from_real_rows(&[[1.0, 2.0, 0.0], [2.0, 4.0, 0.0]]).unwrap();
        let svd = Svd::new(&a).unwrap();
        assert_eq!(svd.rank(1e-12), 1);
        let ns = svd.null_space(1e-12);
        assert_eq!(ns.cols(), 2);
        assert!((&a * &ns).max_abs() < 1e-14);
        let gram = &ns.adjoint() * &ns;
        assert!((&gram - &Matrix::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn wide_matrix_singular_values() {
        let a = Matrix::from_real_rows(&[[3.0, 0.0, 0.0], [0.0, 0.0, 4.0]]).unwrap();
        assert_eq!(singular_values(&a).unwrap(), vec![4.0, 3.0]);
        assert_eq!(rank(&a, 1e-12).unwrap(), 2);
    }
}
