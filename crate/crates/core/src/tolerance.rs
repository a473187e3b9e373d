//! Numerical tolerances shared by the pipeline stages.

use crate::scalar::Real;

/// Tolerances used throughout the pipeline.
///
/// Fields ending in `_rel` are multiplied by a scale (`||A||` or
/// `max(1, ||A||)`) at the point of use; the rest are absolute.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceConfig<T> {
    /// Allowed `||H - H*||_F / max(1, ||H||_F)` for Hermitian operands.
    pub hermitian_tol: T,
    /// Eigensolver accuracy used when checking set membership.
    pub eig_tol: T,
    /// Relative clipping threshold for square roots and PSD checks.
    pub psd_tol: T,
    /// Singular values `<= rank_tol_rel * ||A||` count as zero.
    pub rank_tol_rel: T,
    /// Eigenvalues within `cluster_tol_rel * max(1, ||A||)` are merged.
    pub cluster_tol_rel: T,
    /// Eigenvalues within this distance of 1 (or 0) go to the identity (or zero) block.
    pub tol_one: T,
    /// Slack for the closed-form 2x2 and two-point comparisons.
    pub boundary_tol: T,
    /// Absolute tolerance for dilation identities.
    pub dil_tol: T,
    /// Allowed excess of a spectral norm over 1.
    pub norm_tol: T,
    /// Zero-block verification threshold, times `max(1, ||A||)`.
    pub canon_tol_rel: T,
    /// Accuracy of `A11 V = V D` and of within-group orthonormality.
    pub basis_tol: T,
    /// Allowed `||PQ - A||_F` for a certified decomposition.
    pub decomp_tol: T,
    /// A Hermitian operand counts as singular when `lambda_min <= pd_tol * max(1, lambda_max)`.
    pub pd_tol: T,
}

impl<T: Real> Default for ToleranceConfig<T> {
    fn default() -> Self {
        Self {
            hermitian_tol: T::lit(1e-10),
            eig_tol: T::lit(1e-10),
            psd_tol: T::lit(1e-10),
            rank_tol_rel: T::lit(1e-9),
            cluster_tol_rel: T::lit(1e-7),
            tol_one: T::lit(1e-8),
            boundary_tol: T::lit(1e-9),
            dil_tol: T::lit(1e-9),
            norm_tol: T::lit(1e-8),
            canon_tol_rel: T::lit(1e-8),
            basis_tol: T::lit(1e-8),
            decomp_tol: T::lit(1e-8),
            pd_tol: T::lit(1e-13),
        }
    }
}

impl<T: Real> ToleranceConfig<T> {
    /// Defaults with every threshold raised to at least `1e3 * T::epsilon()`.
    /// Intended for `f32`; for `f64` it only changes `pd_tol`.
    pub fn for_precision() -> Self {
        let floor = T::epsilon() * T::lit(1e3);
        let d = Self::default();
        let up = |x: T| x.max(floor);
        Self {
            hermitian_tol: up(d.hermitian_tol),
            eig_tol: up(d.eig_tol),
            psd_tol: up(d.psd_tol),
            rank_tol_rel: up(d.rank_tol_rel),
            cluster_tol_rel: up(d.cluster_tol_rel),
            tol_one: up(d.tol_one),
            boundary_tol: up(d.boundary_tol),
            dil_tol: up(d.dil_tol),
            norm_tol: up(d.norm_tol),
            canon_tol_rel: up(d.canon_tol_rel),
            basis_tol: up(d.basis_tol),
            decomp_tol: up(d.decomp_tol),
            pd_tol: T::epsilon() * T::lit(10.0),
        }
    }

    pub fn cluster_tol(&self, norm: T) -> T {
        self.cluster_tol_rel * T::one().max(norm)
    }

    pub fn rank_tol(&self, norm: T) -> T {
        self.rank_tol_rel * norm
    }

    pub fn canon_tol(&self, norm: T) -> T {
        self.canon_tol_rel * T::one().max(norm)
    }
}
