use thiserror::Error;

/// Errors raised by the numerical kernels and the factorization pipeline.
///
/// Magnitudes are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("matrix is not Hermitian: ||H - H*||_F = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("matrix is not positive semidefinite: lambda_min = {min_eig:e}")]
    NotPsd { min_eig: f64 },

    #[error("operand is numerically singular: lambda_min = {min_eig:e}")]
    SingularOperand { min_eig: f64 },

    #[error("not a contraction: ||A|| = {norm}")]
    NotAContraction { norm: f64 },

    #[error("not diagonalizable: eigenvalue {re} + {im}i has geometric multiplicity {geometric} < algebraic multiplicity {algebraic}")]
    NotDiagonalizable {
        re: f64,
        im: f64,
        algebraic: usize,
        geometric: usize,
    },

    #[error("eigenvalue {re} + {im}i lies outside [0, 1]")]
    ComplexOrNegativeSpectrum { re: f64, im: f64 },

    #[error("canonical block {block} has norm {size:e}, expected zero")]
    ResidualTooLarge { block: &'static str, size: f64 },

    #[error("eigenvalue {alpha}: null space of A11 - alpha I has dimension {found}, expected {expected}")]
    DefectiveBlock {
        alpha: f64,
        expected: usize,
        found: usize,
    },

    #[error("Gamma is not positive definite: lambda_min = {min_eig:e}")]
    GammaNotPd { min_eig: f64 },

    #[error("certification failed: {0}")]
    CertificationFailure(String),

    #[error("argument out of domain: {0}")]
    DomainError(String),

    #[error("matrix does not have a two-point spectrum: residual {residual:e}")]
    NotTwoPointSpectrum { residual: f64 },

    #[error("condition (c) violated: {which} has lambda_min = {min_eig:e}")]
    ConditionCViolated { which: &'static str, min_eig: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
