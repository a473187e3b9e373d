//! Dilations to products of two orthogonal projections, used as an
//! independent check on the factorization.

use num_complex::Complex;
use num_traits::One;

use crate::canonical::{analyze_spectrum, CanonicalForm};
use crate::error::{Error, Result};
use crate::factor::Decomposition;
use crate::hermitian::Hermitian;
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::svd;
use crate::tolerance::ToleranceConfig;

/// The dilation `T~` of a canonical form together with the blocks `R`, `C`
/// that define it.
#[derive(Clone, Debug)]
pub struct DilationData<T> {
    pub r: Matrix<T>,
    pub c: Matrix<T>,
    /// `(n + 2m) x (n + 2m)`, in canonical coordinates.
    pub t_tilde: Matrix<T>,
    /// `||(I + R*R) U U* - I||_F`.
    pub r_residual: T,
    /// `||A11 A11* + A12 A12* + A11 C C* A11* - U D U*||_F`.
    pub c_residual: T,
}

fn psd_sqrt_checked<T: Real>(h: &Hermitian<T>, which: &'static str, tol: &ToleranceConfig<T>) -> Result<Hermitian<T>> {
    let eig = h.eig()?;
    let lo = eig.eigenvalues.iter().copied().fold(T::infinity(), T::min);
    let hi = eig.eigenvalues.iter().copied().fold(T::zero(), |a, b| a.max(b.abs()));
    if !eig.eigenvalues.is_empty() && lo < -tol.psd_tol * T::one().max(hi) {
        return Err(Error::ConditionCViolated {
            which,
            min_eig: lo.as_f64(),
        });
    }
    Ok(eig.reconstruct_with(|x| x.max(T::zero()).sqrt()))
}

/// Builds `T~ = I_p ⊕ [[A11, A12, 0, A11 C], [0, 0, 0, 0], [R A11, R A12, 0, R A11 C], [0, 0, 0, 0]]`
/// with `R = ((U U*)^{-1} - I)^{1/2}` and `C = A11^{-1} (U D U* - A11 A11* - A12 A12*)^{1/2}`.
///
/// `u11` must satisfy `A11 U = U D` and be an invertible contraction with
/// `U D U* >= A11 A11* + A12 A12*`.
pub fn build_dilation<T: Real>(
    canon: &CanonicalForm<T>,
    u11: &Matrix<T>,
    d: &[T],
    tol: &ToleranceConfig<T>,
) -> Result<DilationData<T>> {
    let (p, m, q) = (canon.p, canon.m, canon.q);
    if u11.rows() != m || u11.cols() != m || d.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "U is {}x{} and D has {} entries, expected m = {m}",
            u11.rows(),
            u11.cols(),
            d.len()
        )));
    }
    let a11 = &canon.a11;
    let a12 = &canon.a12;

    let uu = Hermitian::symmetrize(u11 * &u11.adjoint());
    let r_arg = uu.psd_inverse(tol.pd_tol)?.shift(-T::one());
    let r = psd_sqrt_checked(&r_arg, "(U U*)^-1 - I", tol)?.into_matrix();

    let udu = Hermitian::symmetrize(&u11.mul_diagonal_right(d) * &u11.adjoint());
    let gram = Hermitian::symmetrize(&(a11 * &a11.adjoint()) + &(a12 * &a12.adjoint()));
    let gap = psd_sqrt_checked(&udu.sub(&gram), "U D U* - A11 A11* - A12 A12*", tol)?;
    let c = &a11.inverse()? * gap.matrix();

    let eye = Matrix::<T>::identity(m);
    let r_residual = (&(&(&eye + &(&r.adjoint() * &r)) * uu.matrix()) - &eye).frobenius_norm();
    let a11c = a11 * &c;
    let c_residual = (&(gram.matrix() + &(&a11c * &a11c.adjoint())) - udu.matrix()).frobenius_norm();

    let n = p + m + q;
    let mut t = Matrix::zeros(n + 2 * m, n + 2 * m);
    t.set_block(0, 0, &Matrix::identity(p));
    let (b1, b2, b3, b4) = (p, p + m, p + m + q, p + 2 * m + q);
    t.set_block(b1, b1, a11);
    t.set_block(b1, b2, a12);
    t.set_block(b1, b4, &a11c);
    t.set_block(b3, b1, &(&r * a11));
    t.set_block(b3, b2, &(&r * a12));
    t.set_block(b3, b4, &(&r * &a11c));

    Ok(DilationData {
        r,
        c,
        t_tilde: t,
        r_residual,
        c_residual,
    })
}

/// Result of [`is_projection_product`].
#[derive(Clone, Debug)]
pub struct ProjectionProductVerdict<T> {
    pub holds: bool,
    /// Violated conditions, empty when `holds`.
    pub failures: Vec<String>,
    /// Dimension of the eigenvalue-1 space.
    pub ones: usize,
    /// Interior eigenvalues with multiplicity, descending.
    pub interior: Vec<T>,
    /// Interior eigenvectors of the compression to the complement of the
    /// eigenvalue-1 space, orthonormal within each eigenvalue.
    pub witness: Option<Matrix<T>>,
}

impl<T> ProjectionProductVerdict<T> {
    fn rejected(failures: Vec<String>) -> Self {
        Self {
            holds: false,
            failures,
            ones: 0,
            interior: Vec::new(),
            witness: None,
        }
    }
}

/// Decides whether `t` is a product of two orthogonal projections.
///
/// Requires a real, diagonalizable spectrum in `[0, 1]`, an eigenvalue-1
/// space on which `T* u = u`, and on the complement a full-rank `S` of
/// interior eigenvectors with `A1 A1* S = A1 S = S diag(a)`.
pub fn is_projection_product<T: Real>(t: &Matrix<T>, tol: &ToleranceConfig<T>) -> Result<ProjectionProductVerdict<T>> {
    t.ensure_square()?;
    let n = t.rows();
    let report = analyze_spectrum(t, tol)?;
    let mut failures = Vec::new();
    for z in &report.outside {
        failures.push(format!("eigenvalue {} + {}i outside [0, 1]", z.re, z.im));
    }
    for c in &report.defective {
        failures.push(format!(
            "eigenvalue {} has algebraic multiplicity {} but geometric {}",
            c.center.re, c.algebraic, c.geometric
        ));
    }
    if !failures.is_empty() {
        return Ok(ProjectionProductVerdict::rejected(failures));
    }

    let scale = T::one().max(report.norm);
    let check = tol.dil_tol * scale;
    let rtol = tol.rank_tol(report.norm).max(T::epsilon() * T::lit(n as f64));
    let one = Complex::<T>::one();

    let fixed = svd::null_space(&t.shift_diagonal(-one), rtol)?;
    if fixed.cols() != report.ones {
        failures.push(format!(
            "eigenvalue 1 has multiplicity {} but a {}-dimensional eigenspace",
            report.ones,
            fixed.cols()
        ));
    }
    let t_adj = t.adjoint();
    let drift = (&(&t_adj * &fixed) - &fixed).frobenius_norm();
    if drift > check {
        failures.push(format!("eigenvalue-1 space does not reduce T: ||T* u - u|| = {:e}", drift.as_f64()));
    }

    let complement = if fixed.cols() == 0 {
        Matrix::identity(n)
    } else {
        svd::null_space(&fixed.adjoint(), rtol)?
    };
    let a1 = &(&complement.adjoint() * t) * &complement;

    let mut columns: Vec<Vec<Complex<T>>> = Vec::new();
    let mut diag = Vec::new();
    for g in &report.interior {
        let shifted = a1.shift_diagonal(Complex::new(-g.alpha, T::zero()));
        let basis = svd::null_space(&shifted, rtol)?;
        if basis.cols() != g.multiplicity {
            failures.push(format!(
                "eigenvalue {} has multiplicity {} but a {}-dimensional eigenspace",
                g.alpha.as_f64(),
                g.multiplicity,
                basis.cols()
            ));
        }
        for j in 0..basis.cols() {
            columns.push(basis.column(j));
            diag.push(g.alpha);
        }
    }
    let s = Matrix::from_columns(a1.rows(), &columns);
    if !columns.is_empty() {
        let sd = s.mul_diagonal_right(&diag);
        let gram_res = (&(&(&a1 * &a1.adjoint()) * &s) - &sd).frobenius_norm();
        let eig_res = (&(&a1 * &s) - &sd).frobenius_norm();
        if gram_res > check {
            failures.push(format!("A1 A1* S != S diag(a): residual {:e}", gram_res.as_f64()));
        }
        if eig_res > check {
            failures.push(format!("A1 S != S diag(a): residual {:e}", eig_res.as_f64()));
        }
        let rank = svd::rank(&s, tol.basis_tol)?;
        if rank < columns.len() {
            failures.push(format!("S has rank {} < {}", rank, columns.len()));
        }
    }

    Ok(ProjectionProductVerdict {
        holds: failures.is_empty(),
        failures,
        ones: report.ones,
        interior: diag,
        witness: Some(s),
    })
}

/// Outcome of [`cross_validate`].
#[derive(Clone, Debug)]
pub struct ValidationReport<T> {
    pub p_idempotence: T,
    pub p_hermitian: T,
    pub q_idempotence: T,
    pub q_hermitian: T,
    /// `||(P~ Q~)_{11} - A||_F`.
    pub product_block: T,
    pub violations: Vec<String>,
}

impl<T> ValidationReport<T> {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn defect_root<T: Real>(h: &Hermitian<T>) -> Result<Matrix<T>> {
    Ok(h.map_spectrum(|x| (x - x * x).max(T::zero()).sqrt())?.into_matrix())
}

/// `[[P, (P - P^2)^{1/2}, 0], [(P - P^2)^{1/2}, I - P, 0], [0, 0, 0]]`, and
/// the same with the second and third block rows and columns exchanged when
/// `swap` is set.
fn projection_dilation<T: Real>(h: &Hermitian<T>, swap: bool) -> Result<Matrix<T>> {
    let n = h.dim();
    let root = defect_root(h)?;
    let rest = &Matrix::identity(n) - h.matrix();
    let k = if swap { 2 * n } else { n };
    let mut out = Matrix::zeros(3 * n, 3 * n);
    out.set_block(0, 0, h.matrix());
    out.set_block(0, k, &root);
    out.set_block(k, 0, &root);
    out.set_block(k, k, &rest);
    Ok(out)
}

/// Dilates `P` and `Q` to orthogonal projections on `C^{3n}` and checks
/// idempotence, self-adjointness and that the leading block of their
/// product is `A`.
pub fn cross_validate<T: Real>(a: &Matrix<T>, dec: &Decomposition<T>, tol: &ToleranceConfig<T>) -> Result<ValidationReport<T>> {
    cross_validate_factors(a, &dec.p, &dec.q, tol)
}

/// [`cross_validate`] for factors that did not come out of the pipeline.
pub fn cross_validate_factors<T: Real>(
    a: &Matrix<T>,
    p: &Hermitian<T>,
    q: &Hermitian<T>,
    tol: &ToleranceConfig<T>,
) -> Result<ValidationReport<T>> {
    a.ensure_square()?;
    let n = a.rows();
    if p.dim() != n || q.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "factors are {}x{} and {}x{}, input is {n}x{n}",
            p.dim(),
            p.dim(),
            q.dim(),
            q.dim()
        )));
    }
    let pt = projection_dilation(p, false)?;
    let qt = projection_dilation(q, true)?;
    let idem = |m: &Matrix<T>| (&(m * m) - m).frobenius_norm();
    let herm = |m: &Matrix<T>| (m - &m.adjoint()).frobenius_norm();
    let product = (&pt * &qt).block(0, 0, n, n);
    let report_tol = tol.dil_tol * T::one().max(a.frobenius_norm());

    let mut report = ValidationReport {
        p_idempotence: idem(&pt),
        p_hermitian: herm(&pt),
        q_idempotence: idem(&qt),
        q_hermitian: herm(&qt),
        product_block: (&product - a).frobenius_norm(),
        violations: Vec::new(),
    };
    let checks = [
        ("P~^2 = P~", report.p_idempotence),
        ("P~ = P~*", report.p_hermitian),
        ("Q~^2 = Q~", report.q_idempotence),
        ("Q~ = Q~*", report.q_hermitian),
        ("(P~ Q~)_11 = A", report.product_block),
    ];
    for (name, value) in checks {
        if !(value <= report_tol) {
            report.violations.push(format!("{name}: residual {:e}", value.as_f64()));
        }
    }
    Ok(report)
}

/// The compressed spectrum of `T~`: eigenvalues with modulus above `tol`,
/// sorted by real part.
pub fn nonzero_eigenvalues<T: Real>(t: &Matrix<T>, tol: T) -> Result<Vec<Complex<T>>> {
    let schur = crate::schur::Schur::new(t)?;
    let mut vals: Vec<Complex<T>> = schur.eigenvalues().into_iter().filter(|z| z.norm() > tol).collect();
    vals.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap_or(std::cmp::Ordering::Equal));
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::canonicalize;
    use crate::reference;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    fn canonical_block(a: f64) -> Matrix<f64> {
        Matrix::from_real_rows(&[[a, (a - a * a).sqrt()], [0.0, 0.0]]).unwrap()
    }

    #[test]
    fn projection_is_a_projection_product() {
        let p = Matrix::<f64>::from_diagonal(&[1.0, 0.0, 1.0]);
        let v = is_projection_product(&p, &tol()).unwrap();
        assert!(v.holds, "{:?}", v.failures);
        assert_eq!(v.ones, 2);
        assert!(v.interior.is_empty());
    }

    #[test]
    fn canonical_block_is_a_projection_product() {
        let v = is_projection_product(&canonical_block(0.5), &tol()).unwrap();
        assert!(v.holds, "{:?}", v.failures);
        assert_eq!(v.interior.len(), 1);
    }

    #[test]
    fn interior_rank_two_triangle_is_not() {
        let t = Matrix::from_real_rows(&[[0.36, 0.12], [0.0, 0.64]]).unwrap();
        let v = is_projection_product(&t, &tol()).unwrap();
        assert!(!v.holds);
    }

    #[test]
    fn trivial_dilation_vanishes() {
        // A11 = D = diag(0.5, 0.2) and A12 = sqrt(D - D^2).
        let d = [0.5, 0.2];
        let a11 = Matrix::<f64>::from_diagonal(&d);
        let a12 = Matrix::<f64>::from_diagonal(&[0.5, 0.4]);
        let a = reference::upper_block(&a11, &a12);
        let canon = canonicalize(&a, &tol()).unwrap();
        let dil = build_dilation(&canon, &Matrix::identity(2), &canon.spectrum.interior_diagonal(), &tol()).unwrap();
        assert!(dil.r.max_abs() < 1e-12);
        assert!(dil.c.max_abs() < 1e-6);
        assert!(is_projection_product(&dil.t_tilde, &tol()).unwrap().holds);
    }

    #[test]
    fn half_identity_against_identity() {
        let p = Hermitian::<f64>::from_diagonal(&[0.5, 0.5]);
        let root = defect_root(&p).unwrap();
        assert!((&root - &Matrix::from_diagonal(&[0.5, 0.5])).max_abs() < 1e-15);
    }

    #[test]
    fn shrunken_u_violates_the_gram_bound() {
        let d = [0.5, 0.2];
        let a = reference::upper_block(&Matrix::from_diagonal(&d), &Matrix::from_diagonal(&[0.5, 0.4]));
        let canon = canonicalize(&a, &tol()).unwrap();
        let u = Matrix::<f64>::identity(2).scale(0.5);
        let err = build_dilation(&canon, &u, &canon.spectrum.interior_diagonal(), &tol()).unwrap_err();
        assert!(matches!(err, Error::ConditionCViolated { .. }), "{err}");
    }
}
