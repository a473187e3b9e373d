//! The machine-readable run report.

use posprod::{DecomposeConfig, DecomposeOutcome, Decomposition, SolveOutcome, SpectrumReport};
use serde::{Deserialize, Serialize};

use crate::matrix_file::MatrixFile;

/// Number of trailing feasibility errors kept in a report.
pub const HISTORY_TAIL: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Decomposed,
    Rejected,
    Stalled,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Decomposed => "decomposed",
            Status::Rejected => "rejected",
            Status::Stalled => "stalled",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenGroupSummary {
    pub alpha: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSummary {
    pub eigenvalues: Vec<[f64; 2]>,
    pub ones: usize,
    pub zeros: usize,
    pub interior: Vec<EigenGroupSummary>,
    pub outside: Vec<[f64; 2]>,
    pub diagonalizable: bool,
    pub contraction: bool,
    pub norm: f64,
}

impl From<&SpectrumReport<f64>> for SpectrumSummary {
    fn from(s: &SpectrumReport<f64>) -> Self {
        Self {
            eigenvalues: s.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            ones: s.ones,
            zeros: s.zeros,
            interior: s
                .interior
                .iter()
                .map(|g| EigenGroupSummary {
                    alpha: g.alpha,
                    multiplicity: g.multiplicity,
                })
                .collect(),
            outside: s.outside.iter().map(|z| [z.re, z.im]).collect(),
            diagonalizable: s.diagonalizable,
            contraction: s.contraction,
            norm: s.norm,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSummary {
    pub feas_tol: f64,
    pub eig_tol: f64,
    pub psd_tol: f64,
    pub norm_tol: f64,
    pub decomp_tol: f64,
    pub dil_tol: f64,
    pub max_iter: usize,
    pub stall_window: usize,
    pub stall_rel_change: f64,
}

impl From<&DecomposeConfig<f64>> for ToleranceSummary {
    fn from(c: &DecomposeConfig<f64>) -> Self {
        Self {
            feas_tol: c.solver.feas_tol,
            eig_tol: c.tol.eig_tol,
            psd_tol: c.tol.psd_tol,
            norm_tol: c.tol.norm_tol,
            decomp_tol: c.tol.decomp_tol,
            dil_tol: c.tol.dil_tol,
            max_iter: c.solver.max_iter,
            stall_window: c.solver.stall_window,
            stall_rel_change: c.solver.stall_rel_change,
        }
    }
}

/// Outcome of `decompose`. Factors appear only when `status` is
/// `decomposed`; the numeric fields describe uncertified candidate factors
/// when a rejection produced some.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReport {
    pub status: Status,
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// The input is certainly not a product of two positive contractions.
    pub provable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<MatrixFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<MatrixFile>,
    pub residual: Option<f64>,
    pub p_norm: Option<f64>,
    pub q_norm: Option<f64>,
    pub iterations: usize,
    pub feasibility_error: Option<f64>,
    pub error_history_tail: Vec<f64>,
    pub spectrum: Option<SpectrumSummary>,
    pub tolerances: ToleranceSummary,
}

/// Stage label for a successful run.
pub const COMPLETE_STAGE: &str = "complete";

impl RunReport {
    pub fn new(outcome: &DecomposeOutcome<f64>, config: &DecomposeConfig<f64>) -> Self {
        let tolerances = ToleranceSummary::from(config);
        match outcome {
            DecomposeOutcome::Decomposed(run) => {
                let dec = &run.decomposition;
                let mut report = Self::from_solve(
                    Status::Decomposed,
                    COMPLETE_STAGE,
                    Some(&run.solve),
                    Some(&run.canonical.spectrum),
                    tolerances,
                );
                report.with_factors(dec);
                report.p = Some(MatrixFile::from_matrix(dec.p.matrix()));
                report.q = Some(MatrixFile::from_matrix(dec.q.matrix()));
                report
            }
            DecomposeOutcome::Rejected(rej) => {
                let status = if rej.stage == posprod::RejectionStage::Feasibility {
                    Status::Stalled
                } else {
                    Status::Rejected
                };
                let mut report =
                    Self::from_solve(status, rej.stage.as_str(), rej.solve.as_ref(), rej.spectrum.as_ref(), tolerances);
                report.reason = Some(rej.reason.clone());
                report.provable = rej.provable;
                if let Some(candidate) = &rej.candidate {
                    report.with_factors(candidate);
                }
                report
            }
        }
    }

    fn from_solve(
        status: Status,
        stage: &str,
        solve: Option<&SolveOutcome<f64>>,
        spectrum: Option<&SpectrumReport<f64>>,
        tolerances: ToleranceSummary,
    ) -> Self {
        Self {
            status,
            stage: stage.to_string(),
            reason: None,
            provable: false,
            p: None,
            q: None,
            residual: None,
            p_norm: None,
            q_norm: None,
            iterations: solve.map_or(0, |s| s.iterations),
            feasibility_error: solve.map(|s| s.final_error),
            error_history_tail: solve.map_or_else(Vec::new, |s| s.error_history.tail(HISTORY_TAIL).to_vec()),
            spectrum: spectrum.map(SpectrumSummary::from),
            tolerances,
        }
    }

    fn with_factors(&mut self, dec: &Decomposition<f64>) {
        self.residual = Some(dec.product_residual);
        self.p_norm = Some(dec.p_norm);
        self.q_norm = Some(dec.q_norm);
    }
}
