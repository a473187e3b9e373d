//! Spectral analysis and the unitary canonical form
//! `W* A W = I_p ⊕ [[A11, A12], [0, 0]]`.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::schur::Schur;
use crate::svd;
use crate::tolerance::ToleranceConfig;

/// An interior eigenvalue and its multiplicity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenGroup<T> {
    pub alpha: T,
    pub multiplicity: usize,
}

/// A cluster whose geometric multiplicity falls short of its algebraic one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectiveCluster<T> {
    pub center: Complex<T>,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport<T> {
    /// Eigenvalues in the order produced by the Schur decomposition.
    pub eigenvalues: Vec<Complex<T>>,
    /// Number of eigenvalues assigned to 1.
    pub ones: usize,
    /// Number of eigenvalues assigned to 0.
    pub zeros: usize,
    /// Interior groups, `alpha` strictly descending.
    pub interior: Vec<EigenGroup<T>>,
    /// Cluster centres that are neither 0, 1 nor real in `(0, 1)`.
    pub outside: Vec<Complex<T>>,
    pub diagonalizable: bool,
    pub defective: Vec<DefectiveCluster<T>>,
    pub contraction: bool,
    pub norm: T,
}

impl<T: Real> SpectrumReport<T> {
    /// Total size of the interior part.
    pub fn interior_dim(&self) -> usize {
        self.interior.iter().map(|g| g.multiplicity).sum()
    }

    /// Interior eigenvalues repeated by multiplicity, descending.
    pub fn interior_diagonal(&self) -> Vec<T> {
        self.interior
            .iter()
            .flat_map(|g| std::iter::repeat(g.alpha).take(g.multiplicity))
            .collect()
    }
}

/// `W* A W = I_p ⊕ [[A11, A12], [0, 0_q]]` with `A11` upper triangular
/// (`m x m`) and `A12` of size `m x q`, where `q = n - p - m` is the number
/// of zero eigenvalues.
#[derive(Clone, Debug)]
pub struct CanonicalForm<T> {
    pub w: Matrix<T>,
    pub p: usize,
    pub m: usize,
    pub q: usize,
    pub a11: Matrix<T>,
    pub a12: Matrix<T>,
    pub spectrum: SpectrumReport<T>,
    /// `||W* A W - form||_F` before the verified blocks were zeroed.
    pub residual: T,
    /// The input matrix.
    pub input: Matrix<T>,
}

impl<T: Real> CanonicalForm<T> {
    pub fn n(&self) -> usize {
        self.p + self.m + self.q
    }

    /// `I_p ⊕ [[A11, A12], [0, 0]]`.
    pub fn reduced(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.n(), self.n());
        for i in 0..self.p {
            out[(i, i)] = Complex::new(T::one(), T::zero());
        }
        out.set_block(self.p, self.p, &self.a11);
        out.set_block(self.p, self.p + self.m, &self.a12);
        out
    }

    /// `W (I_p ⊕ [[A11, A12], [0, 0]]) W*`.
    pub fn reconstruct(&self) -> Matrix<T> {
        &(&self.w * &self.reduced()) * &self.w.adjoint()
    }

    /// Maps a matrix from canonical coordinates back to the input basis.
    pub fn to_input_basis(&self, x: &Matrix<T>) -> Matrix<T> {
        &(&self.w * x) * &self.w.adjoint()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    One,
    Interior(usize),
    Zero,
    Outside,
}

struct Analysis<T> {
    report: SpectrumReport<T>,
    schur: Schur<T>,
    slots: Vec<Slot>,
}

/// Eigenvalues, clustering, diagonalizability and contraction test.
/// Rejection conditions are reported as flags, not errors.
pub fn analyze_spectrum<T: Real>(a: &Matrix<T>, tol: &ToleranceConfig<T>) -> Result<SpectrumReport<T>> {
    Ok(analyze(a, tol)?.report)
}

fn analyze<T: Real>(a: &Matrix<T>, tol: &ToleranceConfig<T>) -> Result<Analysis<T>> {
    a.ensure_square()?;
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let n = a.rows();
    let norm = svd::spectral_norm(a)?;
    let schur = Schur::new(a)?;
    let eig = schur.eigenvalues();
    let ctol = tol.cluster_tol(norm);

    let clusters = single_linkage(&eig, ctol);
    let mut centers = Vec::with_capacity(clusters.len());
    for members in &clusters {
        let sum: Complex<T> = members.iter().map(|&i| eig[i]).sum();
        centers.push(sum / T::lit(members.len() as f64));
    }

    let one = T::one();
    let mut interior_ids: Vec<usize> = Vec::new();
    let mut outside = Vec::new();
    let mut cluster_slot = vec![Slot::Outside; clusters.len()];
    for (c, z) in centers.iter().enumerate() {
        let real = z.im.abs() <= ctol;
        if (*z - Complex::new(one, T::zero())).norm() <= tol.tol_one {
            cluster_slot[c] = Slot::One;
        } else if z.norm() <= tol.tol_one {
            cluster_slot[c] = Slot::Zero;
        } else if real && z.re > tol.tol_one && z.re < one - tol.tol_one {
            interior_ids.push(c);
        } else {
            outside.push(*z);
        }
    }
    interior_ids.sort_by(|&x, &y| centers[y].re.partial_cmp(&centers[x].re).unwrap_or(std::cmp::Ordering::Equal));
    let mut interior = Vec::with_capacity(interior_ids.len());
    for (g, &c) in interior_ids.iter().enumerate() {
        cluster_slot[c] = Slot::Interior(g);
        interior.push(EigenGroup {
            alpha: centers[c].re,
            multiplicity: clusters[c].len(),
        });
    }

    let mut slots = vec![Slot::Outside; n];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            slots[i] = cluster_slot[c];
        }
    }
    let ones = slots.iter().filter(|s| **s == Slot::One).count();
    let zeros = slots.iter().filter(|s| **s == Slot::Zero).count();

    // rank(A - alpha I) = n - multiplicity for every cluster.
    let rtol = tol.rank_tol(norm);
    let mut defective = Vec::new();
    for (c, members) in clusters.iter().enumerate() {
        let alpha = match cluster_slot[c] {
            Slot::One => Complex::new(one, T::zero()),
            Slot::Zero => Complex::zero(),
            Slot::Interior(_) => Complex::new(centers[c].re, T::zero()),
            Slot::Outside => centers[c],
        };
        let shifted = a.shift_diagonal(-alpha);
        let geometric = n - svd::rank(&shifted, rtol)?;
        if geometric < members.len() {
            defective.push(DefectiveCluster {
                center: centers[c],
                algebraic: members.len(),
                geometric,
            });
        }
    }

    let report = SpectrumReport {
        eigenvalues: eig,
        ones,
        zeros,
        interior,
        outside,
        diagonalizable: defective.is_empty(),
        defective,
        contraction: norm <= one + tol.norm_tol,
        norm,
    };
    Ok(Analysis { report, schur, slots })
}

/// Connected components of the graph joining eigenvalues at distance `<= tol`.
fn single_linkage<T: Real>(eig: &[Complex<T>], tol: T) -> Vec<Vec<usize>> {
    let n = eig.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (eig[i] - eig[j]).norm() <= tol {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj.max(ri)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut index_of_root = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if index_of_root[r] == usize::MAX {
            index_of_root[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index_of_root[r]].push(i);
    }
    groups
}

/// Ordered unitary triangularization (ones, interior descending, zeros) with
/// the blocks forced to vanish by the contraction and diagonalizability
/// hypotheses verified and set to exact zeros.
pub fn canonicalize<T: Real>(a: &Matrix<T>, tol: &ToleranceConfig<T>) -> Result<CanonicalForm<T>> {
    let Analysis {
        report,
        mut schur,
        slots,
    } = analyze(a, tol)?;
    if !report.contraction {
        return Err(Error::NotAContraction {
            norm: report.norm.as_f64(),
        });
    }
    if let Some(z) = report.outside.first() {
        return Err(Error::ComplexOrNegativeSpectrum {
            re: z.re.as_f64(),
            im: z.im.as_f64(),
        });
    }
    if let Some(d) = report.defective.first() {
        return Err(Error::NotDiagonalizable {
            re: d.center.re.as_f64(),
            im: d.center.im.as_f64(),
            algebraic: d.algebraic,
            geometric: d.geometric,
        });
    }

    schur.reorder_by_keys(slots);
    let n = a.rows();
    let p = report.ones;
    let m = report.interior_dim();
    let q = n - p - m;
    let mut t = schur.t;
    let ztol = tol.canon_tol(report.norm);

    let mut residual2 = T::zero();
    let mut check = |t: &mut Matrix<T>, r0: usize, c0: usize, nr: usize, nc: usize, target_identity: bool, name: &'static str| -> Result<()> {
        let mut size2 = T::zero();
        for i in 0..nr {
            for j in 0..nc {
                let want = if target_identity && i == j { T::one() } else { T::zero() };
                let d = t[(r0 + i, c0 + j)] - Complex::new(want, T::zero());
                size2 += d.norm_sqr();
                t[(r0 + i, c0 + j)] = Complex::new(want, T::zero());
            }
        }
        residual2 += size2;
        let size = size2.sqrt();
        if size > ztol {
            return Err(Error::ResidualTooLarge {
                block: name,
                size: size.as_f64(),
            });
        }
        Ok(())
    };
    check(&mut t, 0, 0, p, p, true, "identity")?;
    check(&mut t, 0, p, p, m + q, false, "identity coupling")?;
    check(&mut t, p + m, p + m, q, q, false, "trailing zero")?;
    // Strictly lower parts are exact zeros after the Schur decomposition.

    let a11 = t.block(p, p, m, m);
    let a12 = t.block(p, p + m, m, q);
    Ok(CanonicalForm {
        w: schur.z,
        p,
        m,
        q,
        a11,
        a12,
        residual: residual2.sqrt(),
        spectrum: report,
        input: a.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    #[test]
    fn diagonal_input_report() {
        let a = Matrix::from_diagonal(&[1.0, 0.5, 0.0]);
        let r = analyze_spectrum(&a, &tol()).unwrap();
        assert_eq!((r.ones, r.zeros), (1, 1));
        assert_eq!(r.interior.len(), 1);
        assert!((r.interior[0].alpha - 0.5).abs() < 1e-15);
        assert_eq!(r.interior[0].multiplicity, 1);
        assert!(r.diagonalizable && r.contraction);
    }

    #[test]
    fn jordan_block_is_not_diagonalizable() {
        let a = Matrix::from_real_rows(&[[0.5, 1e6], [0.0, 0.5]]).unwrap();
        let r = analyze_spectrum(&a, &tol()).unwrap();
        assert_eq!(r.interior, vec![EigenGroup { alpha: 0.5, multiplicity: 2 }]);
        assert!(!r.diagonalizable);
        assert!(!r.contraction);
    }

    #[test]
    fn intro_matrix_report() {
        let a = Matrix::from_real_rows(&[[9.0 / 25.0, 3.0 / 25.0], [0.0, 16.0 / 25.0]]).unwrap();
        let r = analyze_spectrum(&a, &tol()).unwrap();
        assert_eq!((r.ones, r.zeros), (0, 0));
        assert_eq!(r.interior.len(), 2);
        assert!((r.interior[0].alpha - 0.64).abs() < 1e-15);
        assert!((r.interior[1].alpha - 0.36).abs() < 1e-15);
        assert!(r.contraction && r.diagonalizable);
    }

    #[test]
    fn already_canonical_input() {
        let a = Matrix::from_real_rows(&[[1.0, 0.0, 0.0], [0.0, 0.5, 0.3], [0.0, 0.0, 0.0]]).unwrap();
        let c = canonicalize(&a, &tol()).unwrap();
        assert_eq!((c.p, c.m, c.q), (1, 1, 1));
        assert!((c.a11[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((c.a12[(0, 0)].norm() - 0.3).abs() < 1e-15);
        assert!((&c.reconstruct() - &a).max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_contraction() {
        let a = Matrix::from_diagonal(&[0.4, 0.9]);
        let c = canonicalize(&a, &tol()).unwrap();
        assert_eq!((c.p, c.m, c.q), (0, 2, 0));
        assert!((&c.a11 - &Matrix::from_diagonal(&[0.9, 0.4])).max_abs() < 1e-15);
        assert_eq!(c.a12.cols(), 0);
    }

    #[test]
    fn rejections() {
        let big = Matrix::from_diagonal(&[1.5, 0.2]);
        assert!(matches!(canonicalize(&big, &tol()), Err(Error::NotAContraction { .. })));
        let neg = Matrix::from_diagonal(&[-0.5, 0.2]);
        assert!(matches!(canonicalize(&neg, &tol()), Err(Error::ComplexOrNegativeSpectrum { .. })));
        let rot = Matrix::from_real_rows(&[[0.0, -0.5], [0.5, 0.0]]).unwrap();
        assert!(matches!(canonicalize(&rot, &tol()), Err(Error::ComplexOrNegativeSpectrum { .. })));
        let nil = Matrix::from_real_rows(&[[0.0, 0.5], [0.0, 0.0]]).unwrap();
        assert!(matches!(canonicalize(&nil, &tol()), Err(Error::NotDiagonalizable { .. })));
    }

    #[test]
    fn dense_input_reconstructs() {
        // S diag(1, 0.7, 0.2, 0) S^{-1} is not a contraction in general, so
        // build a unitary conjugate of a canonical form instead.
        let form = Matrix::from_real_rows(&[
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.7, 0.1, 0.2],
            [0.0, 0.0, 0.2, 0.3],
            [0.0, 0.0, 0.0, 0.0],
        ])
        .unwrap();
        let h = Matrix::from_real_rows(&[
            [0.3, 0.1, -0.2, 0.5],
            [0.1, -0.4, 0.3, 0.0],
            [-0.2, 0.3, 0.6, 0.2],
            [0.5, 0.0, 0.2, -0.1],
        ])
        .unwrap();
        let u = crate::hermitian::Hermitian::symmetrize(h).eig().unwrap().eigenvectors;
        let a = &(&u * &form) * &u.adjoint();
        let c = canonicalize(&a, &tol()).unwrap();
        assert_eq!((c.p, c.m, c.q), (1, 2, 1));
        assert!((&c.reconstruct() - &a).max_abs() < 1e-13);
        assert!(c.residual < 1e-13);
        assert!((c.a11[(0, 0)].re - 0.7).abs() < 1e-13);
        assert!((c.a11[(1, 1)].re - 0.2).abs() < 1e-13);
    }
}
