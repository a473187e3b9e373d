//! Factors `P`, `Q` from a feasible `Gamma`, their certification, the
//! closed-form tests for two-point spectra, and the end-to-end pipeline.

use num_complex::Complex;

use crate::canonical::{analyze_spectrum, canonicalize, CanonicalForm, SpectrumReport};
use crate::error::{Error, Result};
use crate::feasibility::{
    build_eigenbasis_for, build_problem, project_omega0, solve, solve_from, BlockPartition, EigenBasis, FeasibilityProblem, SolveOutcome,
    SolveStatus, SolverConfig,
};
use crate::hermitian::Hermitian;
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::svd;
use crate::tolerance::ToleranceConfig;

/// `A = P Q` with `P`, `Q` positive contractions, in the input basis.
#[derive(Clone, Debug)]
pub struct Decomposition<T> {
    pub p: Hermitian<T>,
    pub q: Hermitian<T>,
    /// `||P Q - A||_F` against the original input.
    pub product_residual: T,
    pub p_norm: T,
    pub q_norm: T,
    pub p_min_eig: T,
    pub q_min_eig: T,
    /// The `Gamma` actually used (after any nudge).
    pub gamma: Hermitian<T>,
    /// Whether `Gamma` was shifted by the solver tolerance before inversion.
    pub nudged: bool,
    /// `U = V Gamma^{-1/2}` (`m x m`, canonical coordinates).
    pub u: Matrix<T>,
}

impl<T: Real> Decomposition<T> {
    /// Checks PSD-ness, the norm bounds and the product residual; lists
    /// every violated condition.
    pub fn certify(&self, tol: &ToleranceConfig<T>) -> Result<()> {
        let mut failures = Vec::new();
        if self.p_min_eig < -tol.psd_tol {
            failures.push(format!("lambda_min(P) = {:e}", self.p_min_eig));
        }
        if self.q_min_eig < -tol.psd_tol {
            failures.push(format!("lambda_min(Q) = {:e}", self.q_min_eig));
        }
        if self.p_norm > T::one() + tol.norm_tol {
            failures.push(format!("||P|| = {}", self.p_norm));
        }
        if self.q_norm > T::one() + tol.norm_tol {
            failures.push(format!("||Q|| = {}", self.q_norm));
        }
        if !(self.product_residual <= tol.decomp_tol) {
            failures.push(format!("||PQ - A||_F = {:e}", self.product_residual));
        }
        if failures.is_empty() {
            Ok(())
        } else {
            Err(Error::CertificationFailure(failures.join("; ")))
        }
    }
}

/// Smallest eigenvalue and spectral norm of a Hermitian matrix.
pub(crate) fn extremes<T: Real>(h: &Hermitian<T>) -> Result<(T, T)> {
    let ev = h.eigenvalues()?;
    let lo = ev.first().copied().unwrap_or_else(T::zero);
    let hi = ev.last().copied().unwrap_or_else(T::zero);
    Ok((lo, lo.abs().max(hi.abs())))
}

/// Builds `P` and `Q` from `Gamma` without certifying them.
///
/// `nudge` is added to `Gamma` when `lambda_min(Gamma - V*V) < 0`.
pub fn assemble_factors<T: Real>(
    canon: &CanonicalForm<T>,
    basis: &EigenBasis<T>,
    gamma: &Hermitian<T>,
    nudge: T,
    tol: &ToleranceConfig<T>,
) -> Result<Decomposition<T>> {
    let m = canon.m;
    if gamma.dim() != m || basis.v.rows() != m {
        return Err(Error::DimensionMismatch(format!(
            "Gamma is {0}x{0}, interior part is {m}x{m}",
            gamma.dim()
        )));
    }
    let y = Hermitian::identity(m).congruence(&basis.v);
    let mut gamma = gamma.clone();
    let mut nudged = false;
    if m > 0 && gamma.sub(&y).lambda_min()? < T::zero() {
        gamma = gamma.shift(nudge);
        nudged = true;
    }
    let inv_sqrt = block_inverse_sqrt(&gamma, &basis.blocks, tol.pd_tol)?;
    let u = &basis.v * inv_sqrt.matrix();
    let ui = u.inverse()?;
    let ui_star = ui.adjoint();
    let inv_d: Vec<T> = basis.d.iter().map(|&a| a.recip()).collect();
    let a12 = &canon.a12;

    let p_int = Hermitian::symmetrize(&u * &u.adjoint());
    let q11 = &ui_star * &ui.mul_diagonal_left(&basis.d);
    let uu_inv = &ui_star * &ui;
    let q12 = &uu_inv * a12;
    let q22 = &(&a12.adjoint() * &(&ui_star * &ui.mul_diagonal_left(&inv_d))) * a12;

    let n = canon.n();
    let (p0, q0) = (canon.p, canon.q);
    let mut pc = Matrix::zeros(n, n);
    let mut qc = Matrix::zeros(n, n);
    for i in 0..p0 {
        pc[(i, i)] = Complex::new(T::one(), T::zero());
        qc[(i, i)] = Complex::new(T::one(), T::zero());
    }
    pc.set_block(p0, p0, p_int.matrix());
    qc.set_block(p0, p0, &q11);
    qc.set_block(p0, p0 + m, &q12);
    qc.set_block(p0 + m, p0, &q12.adjoint());
    qc.set_block(p0 + m, p0 + m, &q22);
    debug_assert_eq!(q22.rows(), q0);

    let p = Hermitian::symmetrize(canon.to_input_basis(&pc));
    let q = Hermitian::symmetrize(canon.to_input_basis(&qc));
    let product_residual = (&(p.matrix() * q.matrix()) - &canon.input).frobenius_norm();
    let (p_min_eig, p_norm) = extremes(&p)?;
    let (q_min_eig, q_norm) = extremes(&q)?;
    Ok(Decomposition {
        p,
        q,
        product_residual,
        p_norm,
        q_norm,
        p_min_eig,
        q_min_eig,
        gamma,
        nudged,
        u,
    })
}

/// `assemble_factors` followed by `Decomposition::certify`.
pub fn construct_factors<T: Real>(
    canon: &CanonicalForm<T>,
    basis: &EigenBasis<T>,
    gamma: &Hermitian<T>,
    nudge: T,
    tol: &ToleranceConfig<T>,
) -> Result<Decomposition<T>> {
    let dec = assemble_factors(canon, basis, gamma, nudge, tol)?;
    dec.certify(tol)?;
    Ok(dec)
}

/// `Gamma^{-1/2}` computed block by block.
fn block_inverse_sqrt<T: Real>(gamma: &Hermitian<T>, blocks: &BlockPartition, pd_tol: T) -> Result<Hermitian<T>> {
    let n = gamma.dim();
    let mut out = Matrix::zeros(n, n);
    for r in blocks.ranges() {
        let g = Hermitian::symmetrize(gamma.matrix().block(r.start, r.start, r.len(), r.len()));
        let e = g.eig()?;
        let lo = e.eigenvalues.first().copied().unwrap_or_else(T::one);
        let hi = e.eigenvalues.last().copied().unwrap_or_else(T::one);
        if lo <= pd_tol * T::one().max(hi) {
            return Err(Error::GammaNotPd { min_eig: lo.as_f64() });
        }
        out.set_block(r.start, r.start, e.reconstruct_with(|l| l.sqrt().recip()).matrix());
    }
    Ok(Hermitian::symmetrize(out))
}

/// Outcome of a closed-form test: `lhs` is `|p|` for the 2x2 case and the
/// norm expression for two-point spectra.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoByTwoVerdict<T> {
    pub a: T,
    pub b: T,
    pub p_abs: T,
    pub bound: T,
    pub feasible: bool,
}

/// `|sqrt(a) - sqrt(b)| * sqrt((1 - a)(1 - b))`.
pub fn two_point_bound<T: Real>(a: T, b: T) -> T {
    (a.sqrt() - b.sqrt()).abs() * ((T::one() - a) * (T::one() - b)).sqrt()
}

fn check_unit_interval<T: Real>(name: &str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(Error::DomainError(format!("{name} = {x} is outside [0, 1]")))
    }
}

/// Whether `[[a, p], [0, b]]` is a product of two positive contractions.
pub fn decide_2x2<T: Real>(a: T, b: T, p: Complex<T>, boundary_tol: T) -> Result<TwoByTwoVerdict<T>> {
    check_unit_interval("a", a)?;
    check_unit_interval("b", b)?;
    let bound = two_point_bound(a, b);
    let p_abs = p.norm();
    Ok(TwoByTwoVerdict {
        a,
        b,
        p_abs,
        bound,
        feasible: p_abs <= bound + boundary_tol,
    })
}

/// Closed-form test for `B` similar to a diagonal matrix with eigenvalues in
/// `{a, b}`, optionally plus a zero part that reduces `B`.
///
/// The left-hand side `sqrt(||B||^2 - (a^2 + b^2) + (ab / ||B||)^2)` is
/// compared against the same bound as `decide_2x2`.
pub fn decide_two_point_spectrum<T: Real>(
    b_mat: &Matrix<T>,
    a: T,
    b: T,
    tol: &ToleranceConfig<T>,
) -> Result<TwoByTwoVerdict<T>> {
    b_mat.ensure_square()?;
    for (name, x) in [("a", a), ("b", b)] {
        if !(x > T::zero() && x <= T::one()) {
            return Err(Error::DomainError(format!("{name} = {x} is outside (0, 1]")));
        }
    }
    let n = b_mat.rows();
    let norm = svd::spectral_norm(b_mat)?;
    let shift = |s: T| b_mat.shift_diagonal(Complex::new(-s, T::zero()));
    let quad = &shift(a) * &shift(b);
    let scale = T::one().max(norm);
    let thr = tol.canon_tol(scale * scale);
    let direct = quad.frobenius_norm();
    if direct > thr {
        // Allow B = B' ⊕ 0 with ker B reducing B.
        let cubic = (b_mat * &quad).frobenius_norm();
        let kernel = svd::null_space(b_mat, tol.rank_tol(scale))?;
        let proj = &kernel * &kernel.adjoint();
        let leak = (&proj * b_mat).frobenius_norm();
        if cubic > thr * scale || leak > tol.canon_tol(scale) || kernel.cols() == n {
            return Err(Error::NotTwoPointSpectrum {
                residual: direct.as_f64(),
            });
        }
    }
    let inner = norm * norm - (a * a + b * b) + (a * b / norm) * (a * b / norm);
    let lhs = inner.max(T::zero()).sqrt();
    let bound = two_point_bound(a, b);
    Ok(TwoByTwoVerdict {
        a,
        b,
        p_abs: lhs,
        bound,
        feasible: lhs <= bound + tol.boundary_tol,
    })
}

/// Tolerances and solver limits for `decompose`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecomposeConfig<T> {
    pub tol: ToleranceConfig<T>,
    pub solver: SolverConfig<T>,
    /// When the run from `Gamma_0 = (X + Y)/2` (blockwise) does not reach
    /// `feas_tol`, run once more from `Gamma_0 = blockdiag(Y)`.
    pub restart: bool,
}

impl<T: Real> Default for DecomposeConfig<T> {
    fn default() -> Self {
        Self {
            tol: ToleranceConfig::default(),
            solver: SolverConfig::default(),
            restart: true,
        }
    }
}

/// Pipeline stage at which a matrix was rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectionStage {
    /// Spectrum outside `[0, 1]`, not diagonalizable, or not a contraction.
    Spectrum,
    /// Blocks that must vanish in the canonical form did not.
    CanonicalForm,
    /// Eigenspace dimensions disagree with the clustering.
    Eigenbasis,
    /// `A11 A11* + A12 A12*` is singular.
    Problem,
    /// The solver stalled or ran out of iterations.
    Feasibility,
    /// Factors were built but failed certification.
    Certification,
}

impl RejectionStage {
    pub fn as_str(&self) -> &'static str {
        match self {
            RejectionStage::Spectrum => "spectrum",
            RejectionStage::CanonicalForm => "canonical_form",
            RejectionStage::Eigenbasis => "eigenbasis",
            RejectionStage::Problem => "problem",
            RejectionStage::Feasibility => "feasibility",
            RejectionStage::Certification => "certification",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RejectionReport<T> {
    pub stage: RejectionStage,
    pub reason: String,
    /// True when the input is certainly not a product of two positive
    /// contractions (a necessary condition fails, or a closed form decides).
    pub provable: bool,
    pub spectrum: Option<SpectrumReport<T>>,
    pub solve: Option<SolveOutcome<T>>,
    pub closed_form: Option<TwoByTwoVerdict<T>>,
    /// Factors that were built but not certified.
    pub candidate: Option<Decomposition<T>>,
}

/// Everything produced by a successful run.
#[derive(Clone, Debug)]
pub struct DecomposeRun<T> {
    pub canonical: CanonicalForm<T>,
    pub basis: EigenBasis<T>,
    pub problem: FeasibilityProblem<T>,
    /// The run whose iterate produced the factors. Its status is not
    /// `Feasible` when the factors were accepted on certification alone.
    pub solve: SolveOutcome<T>,
    /// Whether `solve` is the restarted run.
    pub restarted: bool,
    pub decomposition: Decomposition<T>,
}

#[derive(Clone, Debug)]
pub enum DecomposeOutcome<T> {
    Decomposed(Box<DecomposeRun<T>>),
    Rejected(Box<RejectionReport<T>>),
}

impl<T> DecomposeOutcome<T> {
    pub fn is_decomposed(&self) -> bool {
        matches!(self, DecomposeOutcome::Decomposed(_))
    }

    pub fn decomposed(&self) -> Option<&DecomposeRun<T>> {
        match self {
            DecomposeOutcome::Decomposed(r) => Some(r),
            DecomposeOutcome::Rejected(_) => None,
        }
    }

    pub fn rejected(&self) -> Option<&RejectionReport<T>> {
        match self {
            DecomposeOutcome::Decomposed(_) => None,
            DecomposeOutcome::Rejected(r) => Some(r),
        }
    }
}

fn reject<T>(stage: RejectionStage, reason: String, provable: bool) -> RejectionReport<T> {
    RejectionReport {
        stage,
        reason,
        provable,
        spectrum: None,
        solve: None,
        closed_form: None,
        candidate: None,
    }
}

/// Canonicalize, build the sandwich problem, solve it, and construct and
/// certify the factors.
///
/// Numerical failures (non-convergence, malformed input) are errors; every
/// mathematical reason for not producing factors is a `Rejected` outcome.
pub fn decompose<T: Real>(a: &Matrix<T>, config: &DecomposeConfig<T>) -> Result<DecomposeOutcome<T>> {
    decompose_with_basis(a, config, |canon, tol| build_eigenbasis_for(canon, tol))
}

/// `decompose` with a caller-chosen eigenbasis of `A11`.
pub fn decompose_with_basis<T: Real>(
    a: &Matrix<T>,
    config: &DecomposeConfig<T>,
    make_basis: impl FnOnce(&CanonicalForm<T>, &ToleranceConfig<T>) -> Result<EigenBasis<T>>,
) -> Result<DecomposeOutcome<T>> {
    a.ensure_square()?;
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    config.solver.validate()?;
    let tol = &config.tol;
    let rejected = |r: RejectionReport<T>| Ok(DecomposeOutcome::Rejected(Box::new(r)));

    let canon = match canonicalize(a, tol) {
        Ok(c) => c,
        Err(e) => {
            let (stage, provable) = match e {
                Error::NotAContraction { .. } | Error::ComplexOrNegativeSpectrum { .. } | Error::NotDiagonalizable { .. } => {
                    (RejectionStage::Spectrum, true)
                }
                Error::ResidualTooLarge { .. } => (RejectionStage::CanonicalForm, false),
                other => return Err(other),
            };
            let mut r = reject(stage, e.to_string(), provable);
            r.spectrum = analyze_spectrum(a, tol).ok();
            return rejected(r);
        }
    };

    let basis = match make_basis(&canon, tol) {
        Ok(b) => b,
        Err(e @ (Error::DefectiveBlock { .. } | Error::SingularOperand { .. } | Error::CertificationFailure(_))) => {
            let mut r = reject(RejectionStage::Eigenbasis, e.to_string(), false);
            r.spectrum = Some(canon.spectrum.clone());
            return rejected(r);
        }
        Err(e) => return Err(e),
    };
    let problem = match build_problem(&basis, &canon.a11, &canon.a12, tol) {
        Ok(p) => p,
        Err(e @ Error::SingularOperand { .. }) => {
            let mut r = reject(RejectionStage::Problem, e.to_string(), false);
            r.spectrum = Some(canon.spectrum.clone());
            return rejected(r);
        }
        Err(e) => return Err(e),
    };

    let primary = solve(&problem, &config.solver)?;
    let mut attempts = vec![(primary, false)];
    if !attempts[0].0.status.is_feasible() && config.restart {
        let start = project_omega0(&problem.y, &problem.blocks)?;
        attempts.push((solve_from(&problem, start, &config.solver, |_, _| {})?, true));
    }
    let chosen = match attempts.iter().position(|(o, _)| o.status.is_feasible()) {
        Some(i) => i,
        None => (0..attempts.len())
            .min_by(|&i, &j| {
                let (ei, ej) = (attempts[i].0.final_error, attempts[j].0.final_error);
                ei.partial_cmp(&ej).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0),
    };
    let converged = attempts[chosen].0.status.is_feasible();
    let gamma = match &attempts[chosen].0.status {
        SolveStatus::Feasible(g) => g.clone(),
        _ => attempts[chosen].0.last_iterate.clone(),
    };
    // An unconverged iterate is shifted above `Y` before inversion and only
    // kept if the resulting factors certify.
    let nudge = if converged {
        config.solver.feas_tol
    } else {
        (-gamma.sub(&problem.y).lambda_min()?).max(T::zero()) + config.solver.feas_tol
    };
    let (outcome, restarted) = attempts.swap_remove(chosen);
    let primary = if chosen == 0 { None } else { Some(attempts.swap_remove(0).0) };

    let built = assemble_factors(&canon, &basis, &gamma, nudge, tol);
    let certified = match &built {
        Ok(dec) => dec.certify(tol),
        Err(_) => Err(Error::CertificationFailure(String::new())),
    };
    if !converged && certified.is_err() {
        // Report the run from the prescribed start.
        let report_run = primary.unwrap_or(outcome);
        let closed_form = two_point_verdict(a, &canon, tol);
        let provable = closed_form.is_some_and(|v| !v.feasible);
        let reason = format!(
            "no Gamma found: {} after {} iterations, error {:e}",
            report_run.status.label(),
            report_run.iterations,
            report_run.final_error.as_f64()
        );
        let mut r = reject(RejectionStage::Feasibility, reason, provable);
        r.spectrum = Some(canon.spectrum.clone());
        r.solve = Some(report_run);
        r.closed_form = closed_form;
        r.candidate = built.ok();
        return rejected(r);
    }

    let dec = match built {
        Ok(d) => d,
        Err(e @ (Error::GammaNotPd { .. } | Error::SingularOperand { .. })) => {
            let mut r = reject(RejectionStage::Certification, e.to_string(), false);
            r.spectrum = Some(canon.spectrum.clone());
            r.solve = Some(outcome);
            return rejected(r);
        }
        Err(e) => return Err(e),
    };
    if let Err(e) = certified {
        let mut r = reject(RejectionStage::Certification, e.to_string(), false);
        r.spectrum = Some(canon.spectrum.clone());
        r.solve = Some(outcome);
        r.candidate = Some(dec);
        return rejected(r);
    }
    Ok(DecomposeOutcome::Decomposed(Box::new(DecomposeRun {
        canonical: canon,
        basis,
        problem,
        solve: outcome,
        restarted,
        decomposition: dec,
    })))
}

/// Closed-form verdict when the nonzero spectrum has exactly two distinct values.
fn two_point_verdict<T: Real>(a: &Matrix<T>, canon: &CanonicalForm<T>, tol: &ToleranceConfig<T>) -> Option<TwoByTwoVerdict<T>> {
    let groups = &canon.spectrum.interior;
    let (x, y) = match (canon.p > 0, groups.len()) {
        (true, 1) => (T::one(), groups[0].alpha),
        (false, 2) => (groups[0].alpha, groups[1].alpha),
        _ => return None,
    };
    decide_two_point_spectrum(a, x, y, tol).ok()
}
