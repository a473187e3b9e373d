//! The block-diagonal sandwich problem `Y <= Gamma <= X` and its
//! alternating-projection solver.
//!
//! With `A11 V = V D` (`D` the interior eigenvalues, descending, `V` built
//! from orthonormal bases of the eigenspaces), `X = D^{1/2} V* (A11 A11* +
//! A12 A12*)^{-1} V D^{1/2}` and `Y = V* V`. The input is a product of two
//! positive contractions iff some PSD `Gamma`, block diagonal along the
//! eigenvalue groups, satisfies `Y <= Gamma <= X`.

use std::collections::VecDeque;
use std::ops::Range;

use num_complex::Complex;
use num_traits::Zero;

use crate::canonical::{CanonicalForm, SpectrumReport};
use crate::error::{Error, Result};
use crate::hermitian::Hermitian;
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::svd::{self, Svd};
use crate::tolerance::ToleranceConfig;

/// Contiguous diagonal blocks partitioning `0..dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPartition {
    ranges: Vec<Range<usize>>,
}

impl BlockPartition {
    pub fn from_sizes(sizes: &[usize]) -> Self {
        let mut o = 0;
        let ranges = sizes
            .iter()
            .map(|&s| {
                let r = o..o + s;
                o += s;
                r
            })
            .collect();
        Self { ranges }
    }

    pub fn single(dim: usize) -> Self {
        Self::from_sizes(&[dim])
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.ranges.iter().map(|r| r.len()).collect()
    }

    pub fn dim(&self) -> usize {
        self.ranges.last().map_or(0, |r| r.end)
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Largest entry of `g` outside the diagonal blocks.
    pub fn off_block_max<T: Real>(&self, g: &Matrix<T>) -> T {
        let mut owner = vec![0usize; self.dim()];
        for (b, r) in self.ranges.iter().enumerate() {
            for i in r.clone() {
                owner[i] = b;
            }
        }
        let mut worst = T::zero();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if owner[i] != owner[j] {
                    worst = worst.max(g[(i, j)].norm());
                }
            }
        }
        worst
    }
}

/// Eigenvectors of `A11` grouped by eigenvalue.
#[derive(Clone, Debug)]
pub struct EigenBasis<T> {
    /// `m x m`, columns grouped as the blocks.
    pub v: Matrix<T>,
    /// Diagonal of `D`, descending, constant on each block.
    pub d: Vec<T>,
    pub blocks: BlockPartition,
    /// Smallest singular value of `V`.
    pub min_singular_value: T,
    /// `max_j ||A11 V_j - alpha_j V_j||_F`.
    pub residual: T,
}

impl<T: Real> EigenBasis<T> {
    /// Validates a caller-supplied basis: `A11 V = V D` and `V_j* V_j = I`
    /// within `basis_tol`, `V` invertible.
    pub fn from_parts(a11: &Matrix<T>, v: Matrix<T>, groups: &[(T, usize)], tol: &ToleranceConfig<T>) -> Result<Self> {
        a11.ensure_square()?;
        let m = a11.rows();
        if v.rows() != m || v.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "basis is {}x{}, A11 is {m}x{m}",
                v.rows(),
                v.cols()
            )));
        }
        let sizes: Vec<usize> = groups.iter().map(|g| g.1).collect();
        let blocks = BlockPartition::from_sizes(&sizes);
        if blocks.dim() != m {
            return Err(Error::DimensionMismatch("group sizes do not add up to m".into()));
        }
        let d: Vec<T> = groups
            .iter()
            .flat_map(|&(a, k)| std::iter::repeat(a).take(k))
            .collect();
        let basis = Self::finish(a11, v, d, blocks)?;
        let scale = T::one().max(a11.max_abs());
        if basis.residual > tol.basis_tol * scale {
            return Err(Error::CertificationFailure(format!(
                "A11 V != V D: residual {:e}",
                basis.residual
            )));
        }
        for r in basis.blocks.ranges() {
            let vj = basis.v.block(0, r.start, m, r.len());
            let gram = &vj.adjoint() * &vj;
            if (&gram - &Matrix::identity(r.len())).max_abs() > tol.basis_tol {
                return Err(Error::CertificationFailure("eigenspace basis is not orthonormal".into()));
            }
        }
        if basis.min_singular_value <= tol.basis_tol {
            return Err(Error::SingularOperand {
                min_eig: basis.min_singular_value.as_f64(),
            });
        }
        Ok(basis)
    }

    fn finish(a11: &Matrix<T>, v: Matrix<T>, d: Vec<T>, blocks: BlockPartition) -> Result<Self> {
        let resid = &(a11 * &v) - &v.mul_diagonal_right(&d);
        let mut residual = T::zero();
        for r in blocks.ranges() {
            residual = residual.max(resid.block(0, r.start, v.rows(), r.len()).frobenius_norm());
        }
        let min_singular_value = svd::singular_values(&v)?.last().copied().unwrap_or_else(T::one);
        Ok(Self {
            v,
            d,
            blocks,
            min_singular_value,
            residual,
        })
    }

    /// The `(alpha, multiplicity)` groups.
    pub fn groups(&self) -> Vec<(T, usize)> {
        self.blocks.ranges().iter().map(|r| (self.d[r.start], r.len())).collect()
    }
}

/// Orthonormal eigenspace bases of `A11` for the interior groups of `spectrum`.
///
/// For upper triangular `A11` (the canonical form) each eigenvector is found
/// by back substitution with the coordinates of cluster mates set to zero,
/// then orthonormalized within its group. Dense `A11`, or a triangular one
/// whose back substitution is inaccurate, falls back to SVD null spaces.
/// Each column's phase makes its last non-negligible entry real positive.
pub fn build_eigenbasis<T: Real>(
    a11: &Matrix<T>,
    spectrum: &SpectrumReport<T>,
    tol: &ToleranceConfig<T>,
) -> Result<EigenBasis<T>> {
    eigenbasis_impl(a11, spectrum, tol, None)
}

/// `build_eigenbasis` for a canonical form. Phases are fixed in the input
/// basis (columns `W_int x`, where `W_int` are the interior Schur vectors),
/// so the basis does not depend on how the Schur form was reordered.
pub fn build_eigenbasis_for<T: Real>(canon: &CanonicalForm<T>, tol: &ToleranceConfig<T>) -> Result<EigenBasis<T>> {
    let embed = canon.w.block(0, canon.p, canon.n(), canon.m);
    eigenbasis_impl(&canon.a11, &canon.spectrum, tol, Some(&embed))
}

fn eigenbasis_impl<T: Real>(
    a11: &Matrix<T>,
    spectrum: &SpectrumReport<T>,
    tol: &ToleranceConfig<T>,
    embed: Option<&Matrix<T>>,
) -> Result<EigenBasis<T>> {
    a11.ensure_square()?;
    let m = a11.rows();
    let groups: Vec<(T, usize)> = spectrum.interior.iter().map(|g| (g.alpha, g.multiplicity)).collect();
    if groups.iter().map(|g| g.1).sum::<usize>() != m {
        return Err(Error::DimensionMismatch(format!(
            "spectrum has {} interior eigenvalues, A11 is {m}x{m}",
            spectrum.interior_dim()
        )));
    }
    let norm = svd::spectral_norm(a11)?;
    let rtol = tol.rank_tol(norm.max(T::one()));
    let scale = T::one().max(norm);

    let mut svds = Vec::with_capacity(groups.len());
    for &(alpha, k) in &groups {
        let s = Svd::new(&a11.shift_diagonal(Complex::new(-alpha, T::zero())))?;
        let found = m - s.rank(rtol);
        if found != k {
            return Err(Error::DefectiveBlock {
                alpha: alpha.as_f64(),
                expected: k,
                found,
            });
        }
        svds.push(s);
    }

    let d: Vec<T> = groups
        .iter()
        .flat_map(|&(a, k)| std::iter::repeat(a).take(k))
        .collect();
    let sizes: Vec<usize> = groups.iter().map(|g| g.1).collect();
    let blocks = BlockPartition::from_sizes(&sizes);

    if let Some(cols) = triangular_basis(a11, &groups, tol.cluster_tol(norm)) {
        let cols: Vec<_> = cols.into_iter().map(|x| fix_phase(x, embed)).collect();
        let basis = EigenBasis::finish(a11, Matrix::from_columns(m, &cols), d.clone(), blocks.clone())?;
        if basis.residual <= tol.basis_tol * scale {
            return Ok(basis);
        }
    }
    let mut cols = Vec::with_capacity(m);
    for (s, &(_, k)) in svds.iter().zip(&groups) {
        let n = s.right_vectors.rows();
        for j in (n - k)..n {
            cols.push(fix_phase(s.right_vectors.column(j), embed));
        }
    }
    EigenBasis::finish(a11, Matrix::from_columns(m, &cols), d, blocks)
}

/// Rotates the unit vector `x` so that the last entry of `E x` above `1e-8`
/// in modulus is real positive (`E = I` when `embed` is `None`).
fn fix_phase<T: Real>(mut x: Vec<Complex<T>>, embed: Option<&Matrix<T>>) -> Vec<Complex<T>> {
    let y: Vec<Complex<T>> = match embed {
        Some(e) => (0..e.rows())
            .map(|i| (0..x.len()).map(|j| e[(i, j)] * x[j]).sum())
            .collect(),
        None => x.clone(),
    };
    let thr = T::lit(1e-8);
    if let Some(z) = y.iter().rev().find(|z| z.norm() > thr) {
        let phase = z.conj() / z.norm();
        for xi in x.iter_mut() {
            *xi = *xi * phase;
        }
    }
    x
}

fn triangular_basis<T: Real>(a11: &Matrix<T>, groups: &[(T, usize)], ctol: T) -> Option<Vec<Vec<Complex<T>>>> {
    let m = a11.rows();
    for i in 0..m {
        for j in 0..i {
            if !a11[(i, j)].is_zero() {
                return None;
            }
        }
    }
    // Assign each diagonal position to the nearest group.
    let mut owner = vec![usize::MAX; m];
    for (i, o) in owner.iter_mut().enumerate() {
        let z = a11[(i, i)];
        let (best, dist) = groups
            .iter()
            .enumerate()
            .map(|(g, &(a, _))| (g, (z - Complex::new(a, T::zero())).norm()))
            .fold((usize::MAX, T::infinity()), |b, c| if c.1 < b.1 { c } else { b });
        if dist > ctol {
            return None;
        }
        *o = best;
    }
    for (g, &(_, k)) in groups.iter().enumerate() {
        if owner.iter().filter(|&&o| o == g).count() != k {
            return None;
        }
    }

    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(m);
    for (g, &(alpha, _)) in groups.iter().enumerate() {
        let start = cols.len();
        for i in (0..m).filter(|&i| owner[i] == g) {
            let mut x = vec![Complex::zero(); m];
            x[i] = Complex::new(T::one(), T::zero());
            for j in (0..i).rev() {
                if owner[j] == g {
                    continue;
                }
                let mut rhs: Complex<T> = Complex::zero();
                for l in (j + 1)..=i {
                    rhs -= a11[(j, l)] * x[l];
                }
                x[j] = rhs / (a11[(j, j)] - Complex::new(alpha, T::zero()));
            }
            for _ in 0..2 {
                for prev in &cols[start..] {
                    let c: Complex<T> = prev.iter().zip(&x).map(|(p, xi)| p.conj() * xi).sum();
                    for (xi, p) in x.iter_mut().zip(prev) {
                        *xi -= *p * c;
                    }
                }
            }
            let nrm = x.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if !(nrm > T::zero()) || !nrm.is_finite() {
                return None;
            }
            for xi in x.iter_mut() {
                *xi = *xi / nrm;
            }
            cols.push(x);
        }
    }
    Some(cols)
}

/// `Y <= Gamma <= X` with `Gamma` PSD and block diagonal along `blocks`.
#[derive(Clone, Debug)]
pub struct FeasibilityProblem<T> {
    pub x: Hermitian<T>,
    pub y: Hermitian<T>,
    pub blocks: BlockPartition,
}

impl<T: Real> FeasibilityProblem<T> {
    pub fn new(x: Hermitian<T>, y: Hermitian<T>, blocks: BlockPartition) -> Result<Self> {
        if x.dim() != y.dim() || blocks.dim() != x.dim() {
            return Err(Error::DimensionMismatch(format!(
                "X is {0}x{0}, Y is {1}x{1}, blocks cover {2}",
                x.dim(),
                y.dim(),
                blocks.dim()
            )));
        }
        Ok(Self { x, y, blocks })
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }
}

/// Assembles `X` and `Y` from the eigenbasis and the canonical blocks.
pub fn build_problem<T: Real>(
    basis: &EigenBasis<T>,
    a11: &Matrix<T>,
    a12: &Matrix<T>,
    tol: &ToleranceConfig<T>,
) -> Result<FeasibilityProblem<T>> {
    let m = a11.rows();
    if a12.rows() != m || basis.v.rows() != m {
        return Err(Error::DimensionMismatch("A11, A12 and V disagree on m".into()));
    }
    let s = Hermitian::symmetrize(&(a11 * &a11.adjoint()) + &(a12 * &a12.adjoint()));
    let s_inv = s.psd_inverse(tol.pd_tol)?;
    let sqrt_d: Vec<T> = basis.d.iter().map(|&a| a.sqrt()).collect();
    let vd = basis.v.mul_diagonal_right(&sqrt_d);
    let x = s_inv.congruence(&vd);
    let y = Hermitian::identity(m).congruence(&basis.v);
    FeasibilityProblem::new(x, y, basis.blocks.clone())
}

/// Projection onto block-diagonal PSD matrices: PSD part of each diagonal
/// block, everything else dropped.
pub fn project_omega0<T: Real>(g: &Hermitian<T>, blocks: &BlockPartition) -> Result<Hermitian<T>> {
    let n = g.dim();
    let mut out = Matrix::zeros(n, n);
    for r in blocks.ranges() {
        let b = Hermitian::symmetrize(g.matrix().block(r.start, r.start, r.len(), r.len())).psd_part()?;
        out.set_block(r.start, r.start, b.matrix());
    }
    Ok(Hermitian::symmetrize(out))
}

/// Projection onto `{Gamma : Gamma <= X}`: `X - (X - G)^+`.
pub fn project_omega1<T: Real>(g: &Hermitian<T>, x: &Hermitian<T>) -> Result<Hermitian<T>> {
    Ok(x.sub(&x.sub(g).psd_part()?))
}

/// Projection onto `{Gamma : Gamma >= Y}`: `(G - Y)^+ + Y`.
pub fn project_omega2<T: Real>(g: &Hermitian<T>, y: &Hermitian<T>) -> Result<Hermitian<T>> {
    Ok(g.sub(y).psd_part()?.add(y))
}

/// `1/2` times the block-diagonal part of `X + Y`.
pub fn initial_gamma<T: Real>(problem: &FeasibilityProblem<T>) -> Hermitian<T> {
    let n = problem.dim();
    let sum = problem.x.add(&problem.y);
    let mut out = Matrix::zeros(n, n);
    for r in problem.blocks.ranges() {
        out.set_block(r.start, r.start, &sum.matrix().block(r.start, r.start, r.len(), r.len()));
    }
    Hermitian::symmetrize(out.scale(T::lit(0.5)))
}

/// `max(0, -lambda_min(G - Y)) + max(0, -lambda_min(X - G))`.
pub fn feasibility_error<T: Real>(g: &Hermitian<T>, problem: &FeasibilityProblem<T>) -> Result<T> {
    let lo = g.sub(&problem.y).lambda_min()?;
    let hi = problem.x.sub(g).lambda_min()?;
    Ok((-lo).max(T::zero()) + (-hi).max(T::zero()))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub max_iter: usize,
    pub feas_tol: T,
    pub stall_window: usize,
    pub stall_rel_change: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            feas_tol: T::lit(1e-12),
            stall_window: 500,
            stall_rel_change: T::lit(1e-6),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 || self.stall_window == 0 || !(self.feas_tol > T::zero()) || !(self.stall_rel_change > T::zero()) {
            return Err(Error::DomainError("solver limits and tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum SolveStatus<T> {
    Feasible(Hermitian<T>),
    Stalled { residual: T },
    MaxIterReached { residual: T },
}

impl<T> SolveStatus<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SolveStatus::Feasible(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Feasible(_) => "feasible",
            SolveStatus::Stalled { .. } => "stalled",
            SolveStatus::MaxIterReached { .. } => "max_iter",
        }
    }
}

/// Error trace: every iterate up to `DENSE_HISTORY`, every
/// `SPARSE_STRIDE`-th one after that.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ErrorHistory<T> {
    pub iterations: Vec<usize>,
    pub errors: Vec<T>,
}

impl<T: Copy> ErrorHistory<T> {
    pub const DENSE_HISTORY: usize = 10_000;
    pub const SPARSE_STRIDE: usize = 10;

    fn record(&mut self, k: usize, e: T, last: bool) {
        if k <= Self::DENSE_HISTORY || k % Self::SPARSE_STRIDE == 0 || last {
            if self.iterations.last() != Some(&k) {
                self.iterations.push(k);
                self.errors.push(e);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    /// Last `k` recorded errors.
    pub fn tail(&self, k: usize) -> &[T] {
        &self.errors[self.errors.len().saturating_sub(k)..]
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome<T> {
    pub status: SolveStatus<T>,
    pub iterations: usize,
    pub final_error: T,
    /// Last iterate, feasible or not.
    pub last_iterate: Hermitian<T>,
    pub error_history: ErrorHistory<T>,
}

/// The iterates `Gamma_1, Gamma_2, ...`: odd steps project onto
/// `Gamma <= X`, even steps onto `Gamma >= Y`, each followed by the
/// block-diagonal PSD projection.
pub struct AlternatingProjections<'a, T> {
    problem: &'a FeasibilityProblem<T>,
    current: Hermitian<T>,
    k: usize,
}

impl<'a, T: Real> AlternatingProjections<'a, T> {
    pub fn new(problem: &'a FeasibilityProblem<T>) -> Self {
        Self::starting_at(problem, initial_gamma(problem))
    }

    pub fn starting_at(problem: &'a FeasibilityProblem<T>, start: Hermitian<T>) -> Self {
        Self {
            problem,
            current: start,
            k: 0,
        }
    }

    pub fn current(&self) -> &Hermitian<T> {
        &self.current
    }

    pub fn step(&mut self) -> Result<&Hermitian<T>> {
        self.k += 1;
        let half = if self.k % 2 == 1 {
            project_omega1(&self.current, &self.problem.x)?
        } else {
            project_omega2(&self.current, &self.problem.y)?
        };
        self.current = project_omega0(&half, &self.problem.blocks)?;
        Ok(&self.current)
    }
}

impl<T: Real> Iterator for AlternatingProjections<'_, T> {
    type Item = Result<Hermitian<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.step().cloned())
    }
}

/// Runs the alternating projections until the error drops to `feas_tol`,
/// stalls, or `max_iter` is reached.
///
/// A stall is declared once `|e_k - e_{k-W}| / e_k < stall_rel_change`
/// has held for `W` consecutive iterations, `W = stall_window`.
pub fn solve<T: Real>(problem: &FeasibilityProblem<T>, config: &SolverConfig<T>) -> Result<SolveOutcome<T>> {
    solve_with(problem, config, |_, _| {})
}

/// `solve` with a callback invoked on every `(k, error)`.
pub fn solve_with<T: Real>(
    problem: &FeasibilityProblem<T>,
    config: &SolverConfig<T>,
    observe: impl FnMut(usize, T),
) -> Result<SolveOutcome<T>> {
    solve_from(problem, initial_gamma(problem), config, observe)
}

/// `solve_with` from a caller-chosen starting point.
pub fn solve_from<T: Real>(
    problem: &FeasibilityProblem<T>,
    start: Hermitian<T>,
    config: &SolverConfig<T>,
    mut observe: impl FnMut(usize, T),
) -> Result<SolveOutcome<T>> {
    config.validate()?;
    if start.dim() != problem.dim() {
        return Err(Error::DimensionMismatch(format!(
            "start is {0}x{0}, problem is {1}x{1}",
            start.dim(),
            problem.dim()
        )));
    }
    let w = config.stall_window;
    let mut iter = AlternatingProjections::starting_at(problem, start);
    let mut history = ErrorHistory::default();
    let mut window: VecDeque<T> = VecDeque::with_capacity(w + 1);
    let mut flat_run = 0usize;
    let mut error = feasibility_error(iter.current(), problem)?;
    for k in 1..=config.max_iter {
        iter.step()?;
        error = feasibility_error(iter.current(), problem)?;
        observe(k, error);
        let last = k == config.max_iter;
        if error <= config.feas_tol {
            history.record(k, error, true);
            return Ok(SolveOutcome {
                status: SolveStatus::Feasible(iter.current().clone()),
                iterations: k,
                final_error: error,
                last_iterate: iter.current().clone(),
                error_history: history,
            });
        }
        window.push_back(error);
        if window.len() > w + 1 {
            window.pop_front();
        }
        if window.len() == w + 1 {
            let old = window[0];
            if (error - old).abs() / error < config.stall_rel_change {
                flat_run += 1;
            } else {
                flat_run = 0;
            }
        }
        if flat_run >= w {
            history.record(k, error, true);
            return Ok(SolveOutcome {
                status: SolveStatus::Stalled { residual: error },
                iterations: k,
                final_error: error,
                last_iterate: iter.current().clone(),
                error_history: history,
            });
        }
        history.record(k, error, last);
    }
    Ok(SolveOutcome {
        status: SolveStatus::MaxIterReached { residual: error },
        iterations: config.max_iter,
        final_error: error,
        last_iterate: iter.current().clone(),
        error_history: history,
    })
}
