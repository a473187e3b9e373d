//! Hermitian matrices and the spectral functions built on their
//! eigendecomposition: PSD part, principal square root, Moore-Penrose
//! inverse, and inverse of a positive definite matrix.
//!
//! The eigensolver is cyclic complex Jacobi. It is slow for large matrices
//! but accurate to a few ulps of `||H||`, and the matrices handled here are
//! small (the feasibility engine works on `m x m` with `m` the number of
//! interior eigenvalues).

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

const MAX_SWEEPS: usize = 64;

/// A square matrix known to be Hermitian.
///
/// The stored matrix is always exactly Hermitian: constructors symmetrize
/// via `(H + H*) / 2`.
#[derive(Clone, PartialEq, Debug)]
pub struct Hermitian<T> {
    m: Matrix<T>,
}

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors
/// (as columns).
#[derive(Clone, Debug)]
pub struct EigenDecomposition<T> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: Matrix<T>,
}

impl<T: Real> Hermitian<T> {
    /// Accepts `m` if `||m - m*||_F <= tol * max(1, ||m||_F)` and symmetrizes it.
    pub fn new(m: Matrix<T>, tol: T) -> Result<Self> {
        m.ensure_square()?;
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = m.hermitian_defect();
        if defect > tol * T::one().max(m.frobenius_norm()) {
            return Err(Error::NotHermitian {
                defect: defect.as_f64(),
            });
        }
        Ok(Self::symmetrize(m))
    }

    /// Hermitian part of `m`, without any tolerance check.
    pub fn symmetrize(m: Matrix<T>) -> Self {
        assert!(m.is_square(), "Hermitian view of a non-square matrix");
        Self { m: m.hermitian_part() }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        Self {
            m: Matrix::from_diagonal(d),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: Matrix::identity(n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: Matrix::zeros(n, n),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.m
    }

    pub fn add(&self, other: &Hermitian<T>) -> Hermitian<T> {
        Hermitian {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &Hermitian<T>) -> Hermitian<T> {
        Hermitian {
            m: &self.m - &other.m,
        }
    }

    pub fn scale(&self, s: T) -> Hermitian<T> {
        Hermitian { m: self.m.scale(s) }
    }

    pub fn shift(&self, s: T) -> Hermitian<T> {
        Hermitian {
            m: self.m.shift_diagonal(Complex::new(s, T::zero())),
        }
    }

    /// `B* H B` for an arbitrary (possibly rectangular) `B`.
    pub fn congruence(&self, b: &Matrix<T>) -> Hermitian<T> {
        Hermitian::symmetrize(&(&b.adjoint() * &self.m) * b)
    }

    /// Full eigendecomposition, eigenvalues ascending.
    pub fn eig(&self) -> Result<EigenDecomposition<T>> {
        let (vals, vecs) = jacobi_eigen(&self.m, true)?;
        Ok(EigenDecomposition {
            eigenvalues: vals,
            eigenvectors: vecs.expect("vectors requested"),
        })
    }

    /// Eigenvalues only, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<T>> {
        Ok(jacobi_eigen(&self.m, false)?.0)
    }

    pub fn lambda_min(&self) -> Result<T> {
        Ok(self.eigenvalues()?.first().copied().unwrap_or_else(T::infinity))
    }

    pub fn lambda_max(&self) -> Result<T> {
        Ok(self.eigenvalues()?.last().copied().unwrap_or_else(T::neg_infinity))
    }

    /// `f(H) = V f(Lambda) V*`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Result<Hermitian<T>> {
        Ok(self.eig()?.reconstruct_with(f))
    }

    /// Positive semidefinite part `(H + sqrt(H^2)) / 2`: negative eigenvalues clipped to zero.
    pub fn psd_part(&self) -> Result<Hermitian<T>> {
        if self.dim() == 1 {
            let x = self.m[(0, 0)].re.max(T::zero());
            return Ok(Hermitian::from_diagonal(&[x]));
        }
        self.map_spectrum(|l| l.max(T::zero()))
    }

    /// Principal square root. Eigenvalues down to `-psd_tol * ||H||` are
    /// treated as zero; anything more negative is an error.
    pub fn principal_sqrt(&self, psd_tol: T) -> Result<Hermitian<T>> {
        let e = self.eig()?;
        check_psd(&e.eigenvalues, psd_tol)?;
        Ok(e.reconstruct_with(|l| l.max(T::zero()).sqrt()))
    }

    /// Moore-Penrose inverse: eigenvalues with `|lambda| <= rank_tol * ||H||`
    /// map to zero, the rest to `1 / lambda`.
    pub fn moore_penrose(&self, rank_tol: T) -> Result<Hermitian<T>> {
        let e = self.eig()?;
        let thr = rank_tol * spectral_radius(&e.eigenvalues);
        Ok(e.reconstruct_with(|l| if l.abs() <= thr { T::zero() } else { l.recip() }))
    }

    /// Inverse of a positive definite matrix. Fails with `SingularOperand`
    /// when `lambda_min <= pd_tol * max(1, lambda_max)`.
    pub fn psd_inverse(&self, pd_tol: T) -> Result<Hermitian<T>> {
        let e = self.eig()?;
        let lo = e.eigenvalues.first().copied().unwrap_or_else(T::one);
        let hi = e.eigenvalues.last().copied().unwrap_or_else(T::one);
        if lo <= pd_tol * T::one().max(hi) {
            return Err(Error::SingularOperand { min_eig: lo.as_f64() });
        }
        Ok(e.reconstruct_with(|l| l.recip()))
    }
}

impl<T: Real> EigenDecomposition<T> {
    /// `V f(Lambda) V*`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> Hermitian<T> {
        let v = &self.eigenvectors;
        let n = v.rows();
        let fl: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for (k, &w) in fl.iter().enumerate() {
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                let vi = v[(i, k)] * w;
                for j in i..n {
                    out[(i, j)] += vi * v[(j, k)].conj();
                }
            }
        }
        for i in 0..n {
            out[(i, i)].im = T::zero();
            for j in (i + 1)..n {
                out[(j, i)] = out[(i, j)].conj();
            }
        }
        Hermitian { m: out }
    }
}

pub(crate) fn spectral_radius<T: Real>(vals: &[T]) -> T {
    vals.iter().fold(T::zero(), |m, &l| m.max(l.abs()))
}

fn check_psd<T: Real>(vals: &[T], psd_tol: T) -> Result<()> {
    if let Some(&lo) = vals.first() {
        if lo < -psd_tol * spectral_radius(vals) {
            return Err(Error::NotPsd { min_eig: lo.as_f64() });
        }
    }
    Ok(())
}

/// Rotation that annihilates the off-diagonal entry `g` of the Hermitian
/// 2x2 `[[app, g], [conj(g), aqq]]`.
///
/// Returns `(c, s, phase)` describing the unitary
/// `J = [[c, s], [-s * phase, c * phase]]` with `phase = conj(g) / |g|`,
/// so that `J* [[app, g], [conj(g), aqq]] J` is diagonal with entries
/// `app - t |g|` and `aqq + t |g|` where `t = s / c`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct JacobiRotation<T> {
    pub c: T,
    pub s: T,
    pub phase: Complex<T>,
    pub t: T,
}

impl<T: Real> JacobiRotation<T> {
    pub(crate) fn annihilating(app: T, aqq: T, g: Complex<T>) -> Self {
        let abs_g = g.norm();
        let phase = g.conj() / abs_g;
        let theta = (aqq - app) / (abs_g + abs_g);
        let t = if theta.is_infinite() {
            T::zero()
        } else {
            let sign = if theta >= T::zero() { T::one() } else { -T::one() };
            sign / (theta.abs() + (theta * theta + T::one()).sqrt())
        };
        let c = (t * t + T::one()).sqrt().recip();
        Self { c, s: t * c, phase, t }
    }

    /// `M[:, (p, q)] <- M[:, (p, q)] J` on every row.
    #[inline]
    pub(crate) fn apply_right(&self, m: &mut Matrix<T>, p: usize, q: usize) {
        let (c, s, ph) = (self.c, self.s, self.phase);
        for k in 0..m.rows() {
            let mp = m[(k, p)];
            let mq = m[(k, q)];
            m[(k, p)] = mp * c - mq * ph * s;
            m[(k, q)] = mp * s + mq * ph * c;
        }
    }

    /// `M[(p, q), :] <- J* M[(p, q), :]` on every column.
    #[inline]
    fn apply_left_adjoint(&self, m: &mut Matrix<T>, p: usize, q: usize) {
        let (c, s) = (self.c, self.s);
        let phc = self.phase.conj();
        for k in 0..m.cols() {
            let mp = m[(p, k)];
            let mq = m[(q, k)];
            m[(p, k)] = mp * c - mq * phc * s;
            m[(q, k)] = mp * s + mq * phc * c;
        }
    }
}

/// Cyclic Jacobi on the Hermitian part of `h`.
fn jacobi_eigen<T: Real>(h: &Matrix<T>, want_vectors: bool) -> Result<(Vec<T>, Option<Matrix<T>>)> {
    h.ensure_square()?;
    let n = h.rows();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(|| Matrix::zeros(0, 0))));
    }
    if n == 1 {
        return Ok((vec![h[(0, 0)].re], want_vectors.then(|| Matrix::identity(1))));
    }
    let mut a = h.hermitian_part();
    let mut v = want_vectors.then(|| Matrix::identity(n));
    let total = a.frobenius_norm();
    if total == T::zero() {
        return Ok((vec![T::zero(); n], v));
    }
    let eps = T::epsilon();
    let tiny = T::min_positive_value();
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        off = (off + off).sqrt();
        if off <= eps * total * T::lit(0.5) || off <= tiny {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = a[(p, q)];
                let ag = g.norm();
                if ag <= tiny {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip rotations that cannot change the diagonal in working precision.
                if ag <= eps * T::lit(1e-3) * (app.abs() + aqq.abs()) {
                    a[(p, q)] = Complex::zero();
                    a[(q, p)] = Complex::zero();
                    continue;
                }
                let rot = JacobiRotation::annihilating(app, aqq, g);
                rot.apply_right(&mut a, p, q);
                rot.apply_left_adjoint(&mut a, p, q);
                a[(p, p)] = Complex::new(app - rot.t * ag, T::zero());
                a[(q, q)] = Complex::new(aqq + rot.t * ag, T::zero());
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                if let Some(v) = v.as_mut() {
                    rot.apply_right(v, p, q);
                }
            }
        }
    }
    if !converged {
        return Err(Error::NonConvergence("Hermitian Jacobi eigensolver"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&i| diag[i]).collect();
    let vecs = v.map(|v| Matrix::from_fn(n, n, |i, j| v[(i, order[j])]));
    Ok((vals, vecs))
}

/// Builds the Hermitian `sum_j lambda_j x_j x_j*` from orthonormal columns;
/// used by tests and by callers assembling matrices from spectral data.
pub fn from_spectrum<T: Real>(eigenvalues: &[T], vectors: &Matrix<T>) -> Hermitian<T> {
    EigenDecomposition {
        eigenvalues: eigenvalues.to_vec(),
        eigenvectors: vectors.clone(),
    }
    .reconstruct_with(|l| l)
}

impl<T: Real> From<Hermitian<T>> for Matrix<T> {
    fn from(h: Hermitian<T>) -> Matrix<T> {
        h.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn h(rows: &[[f64; 2]]) -> Hermitian<f64> {
        Hermitian::new(Matrix::from_real_rows(rows).unwrap(), 1e-10).unwrap()
    }

    fn close(a: &Matrix<f64>, b: &Matrix<f64>, tol: f64) -> bool {
        (a - b).max_abs() <= tol
    }

    #[test]
    fn diagonal_eigenpairs() {
        let e = Hermitian::from_diagonal(&[3.0, 1.0]).eig().unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 3.0]);
        let perm = Matrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(close(&e.eigenvectors, &perm, 0.0));
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(Hermitian::<f64>::zeros(2).eigenvalues().unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn three_by_three_with_repeated_eigenvalue() {
        let m = Matrix::from_real_rows(&[[1.3, -0.3, 0.0], [-0.3, 1.3, 0.0], [0.0, 0.0, 1.6]]).unwrap();
        let vals = Hermitian::new(m, 1e-10).unwrap().eigenvalues().unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 1.6, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[2], 1.6, epsilon = 1e-14);
    }

    #[test]
    fn complex_reconstruction() {
        let m = Matrix::new(
            3,
            3,
            vec![
                Complex::new(2.0, 0.0),
                Complex::new(0.5, 1.0),
                Complex::new(-0.25, 0.3),
                Complex::new(0.5, -1.0),
                Complex::new(-1.0, 0.0),
                Complex::new(0.0, 0.7),
                Complex::new(-0.25, -0.3),
                Complex::new(0.0, -0.7),
                Complex::new(0.4, 0.0),
            ],
        )
        .unwrap();
        let hm = Hermitian::new(m.clone(), 1e-12).unwrap();
        let e = hm.eig().unwrap();
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let back = e.reconstruct_with(|l| l);
        assert!(close(back.matrix(), &m, 1e-14));
        let vv = &e.eigenvectors.adjoint() * &e.eigenvectors;
        assert!(close(&vv, &Matrix::identity(3), 1e-14));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Matrix::from_real_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(Hermitian::new(m, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn psd_part_examples() {
        let p = Hermitian::from_diagonal(&[1.0, -2.0]).psd_part().unwrap();
        assert!(close(p.matrix(), &Matrix::from_diagonal(&[1.0, 0.0]), 1e-15));
        let p = h(&[[0.0, 1.0], [1.0, 0.0]]).psd_part().unwrap();
        let half = Matrix::from_real_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap();
        assert!(close(p.matrix(), &half, 1e-15));
        let psd = h(&[[2.0, 0.5], [0.5, 1.0]]);
        assert!(close(psd.psd_part().unwrap().matrix(), psd.matrix(), 1e-14));
    }

    #[test]
    fn principal_sqrt_examples() {
        let i = Hermitian::<f64>::identity(3).principal_sqrt(1e-10).unwrap();
        assert!(close(i.matrix(), &Matrix::identity(3), 1e-15));
        let r = Hermitian::from_diagonal(&[4.0, 9.0]).principal_sqrt(1e-10).unwrap();
        assert!(close(r.matrix(), &Matrix::from_diagonal(&[2.0, 3.0]), 1e-15));
        // D - D^2 for D = diag(0.15, 0.15, 0.2).
        let d = [0.15, 0.15, 0.2];
        let dd: Vec<f64> = d.iter().map(|x| x - x * x).collect();
        let r = Hermitian::from_diagonal(&dd).principal_sqrt(1e-10).unwrap();
        assert_abs_diff_eq!(r.matrix()[(0, 0)].re, 0.1275f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.matrix()[(1, 1)].re, 0.1275f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(r.matrix()[(2, 2)].re, 0.4, epsilon = 1e-15);
        assert!(matches!(
            Hermitian::from_diagonal(&[1.0, -0.1]).principal_sqrt(1e-10),
            Err(Error::NotPsd { .. })
        ));
        // Rounding-level negative eigenvalues are clipped.
        assert!(Hermitian::from_diagonal(&[1.0, -1e-14]).principal_sqrt(1e-10).is_ok());
    }

    #[test]
    fn moore_penrose_examples() {
        let mp = Hermitian::from_diagonal(&[2.0, 0.0]).moore_penrose(1e-12).unwrap();
        assert!(close(mp.matrix(), &Matrix::from_diagonal(&[0.5, 0.0]), 1e-15));
        let mp = Hermitian::<f64>::identity(2).moore_penrose(1e-12).unwrap();
        assert!(close(mp.matrix(), &Matrix::identity(2), 1e-15));
        let mp = Hermitian::from_diagonal(&[1e-18, 1.0]).moore_penrose(1e-12).unwrap();
        assert!(close(mp.matrix(), &Matrix::from_diagonal(&[0.0, 1.0]), 1e-15));
    }

    #[test]
    fn lambda_min_examples() {
        assert_eq!(Hermitian::from_diagonal(&[0.2, 5.0]).lambda_min().unwrap(), 0.2);
        let neg = Hermitian::<f64>::identity(3).scale(-1.0);
        assert_abs_diff_eq!(neg.lambda_min().unwrap(), -1.0);
        let m = h(&[[1.0, 0.4243], [0.4243, 1.0]]);
        assert_abs_diff_eq!(m.lambda_min().unwrap(), 0.5757, epsilon = 1e-14);
    }

    #[test]
    fn psd_inverse_examples() {
        let i = Hermitian::<f64>::identity(2).psd_inverse(1e-13).unwrap();
        assert!(close(i.matrix(), &Matrix::identity(2), 1e-15));
        let inv = Hermitian::from_diagonal(&[0.5, 0.25]).psd_inverse(1e-13).unwrap();
        assert!(close(inv.matrix(), &Matrix::from_diagonal(&[2.0, 4.0]), 1e-14));
        assert!(matches!(
            Hermitian::from_diagonal(&[1.0, 0.0]).psd_inverse(1e-13),
            Err(Error::SingularOperand { .. })
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let m = Matrix::<f32>::from_real_rows(&[[0.0f32, 1.0], [1.0, 0.0]]).unwrap();
        let p = Hermitian::new(m, 1e-6).unwrap().psd_part().unwrap();
        assert!((p.matrix()[(0, 1)].re - 0.5).abs() < 1e-6);
    }
}
