//! Factorization of square complex matrices into products of two positive
//! semidefinite contractions.

pub mod canonical;
pub mod dilation;
pub mod error;
pub mod factor;
pub mod feasibility;
pub mod hermitian;
pub mod matrix;
pub mod reference;
pub mod scalar;
pub mod schur;
pub mod svd;
pub mod tolerance;

pub use canonical::{analyze_spectrum, canonicalize, CanonicalForm, EigenGroup, SpectrumReport};
pub use dilation::{
    build_dilation, cross_validate, cross_validate_factors, is_projection_product, DilationData, ProjectionProductVerdict, ValidationReport,
};
pub use error::{Error, Result};
pub use factor::{
    assemble_factors, construct_factors, decide_2x2, decide_two_point_spectrum, decompose, decompose_with_basis,
    two_point_bound, DecomposeConfig, DecomposeOutcome, DecomposeRun, Decomposition, RejectionReport,
    RejectionStage, TwoByTwoVerdict,
};
pub use feasibility::{
    build_eigenbasis, build_eigenbasis_for, build_problem, feasibility_error, initial_gamma, project_omega0, project_omega1,
    project_omega2, solve, solve_from, solve_with, AlternatingProjections, BlockPartition, EigenBasis, ErrorHistory, FeasibilityProblem, SolveOutcome,
    SolveStatus, SolverConfig,
};
pub use hermitian::{EigenDecomposition, Hermitian};
pub use matrix::Matrix;
pub use scalar::Real;
pub use tolerance::ToleranceConfig;

pub type ComplexMatrix = Matrix<f64>;
pub type ComplexMatrix32 = Matrix<f32>;
pub type HermitianMatrix = Hermitian<f64>;
pub type HermitianMatrix32 = Hermitian<f32>;
pub type Tolerances = ToleranceConfig<f64>;
pub type Tolerances32 = ToleranceConfig<f32>;
