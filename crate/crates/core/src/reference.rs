//! Worked instances with known outcomes, used by the regression driver and
//! the acceptance tests. Entries are stored as given (four
//! decimals where that is all that is available).

use crate::matrix::Matrix;

/// What a correct pipeline should report for an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expected {
    Decomposed,
    /// The solver finds no `Gamma` (stall or iteration limit).
    Stalled,
    /// Not a product of two positive contractions, decided by a closed form.
    Rejected,
}

/// A diagonal block of the expected `Gamma`, labelled by its eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaBlock {
    pub alpha: f64,
    pub entries: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct ReferenceInstance {
    pub name: &'static str,
    pub matrix: Matrix<f64>,
    pub expected: Expected,
    pub gamma: Vec<GammaBlock>,
    /// Expected largest eigenvalue of `P`.
    pub lambda_p: Option<f64>,
    /// Expected largest eigenvalue of `Q`.
    pub lambda_q: Option<f64>,
}

fn rows<const N: usize>(r: &[[f64; N]]) -> Matrix<f64> {
    Matrix::from_real_rows(r).expect("finite literal rows")
}

/// `[[A11, A12], [0, 0]]`.
pub fn upper_block(a11: &Matrix<f64>, a12: &Matrix<f64>) -> Matrix<f64> {
    let m = a11.rows();
    let q = a12.cols();
    let mut a = Matrix::zeros(m + q, m + q);
    a.set_block(0, 0, a11);
    a.set_block(0, m, a12);
    a
}

fn block(alpha: f64, entries: &[&[f64]]) -> GammaBlock {
    GammaBlock {
        alpha,
        entries: entries.iter().map(|r| r.to_vec()).collect(),
    }
}

/// `(1/25) [[9, 3], [0, 16]]`: a contraction similar to `diag(9, 16)/25`
/// that is not a product of two positive contractions.
pub fn triangular_2x2() -> ReferenceInstance {
    ReferenceInstance {
        name: "triangular 2x2",
        matrix: rows(&[[9.0, 3.0], [0.0, 16.0]]).scale(1.0 / 25.0),
        expected: Expected::Rejected,
        gamma: Vec::new(),
        lambda_p: None,
        lambda_q: None,
    }
}

pub const BOUNDARY_A: f64 = 0.5;
pub const BOUNDARY_B: f64 = 0.3;
/// Just below the closed-form bound `0.0942929...`.
pub const BOUNDARY_INSIDE: f64 = 0.09429;
/// Just above it.
pub const BOUNDARY_OUTSIDE: f64 = 0.0943;

/// `[[0.5, p], [0, 0.3]] ⊕ 0_2`.
pub fn boundary_pair(p: f64) -> Matrix<f64> {
    let a11 = rows(&[[BOUNDARY_A, p], [0.0, BOUNDARY_B]]);
    upper_block(&a11, &Matrix::zeros(2, 2))
}

pub fn boundary_inside() -> ReferenceInstance {
    ReferenceInstance {
        name: "boundary pair, inside",
        matrix: boundary_pair(BOUNDARY_INSIDE),
        expected: Expected::Decomposed,
        gamma: vec![block(0.5, &[&[1.2759]]), block(0.3, &[&[1.6591]])],
        lambda_p: Some(1.0),
        lambda_q: Some(1.0),
    }
}

pub fn boundary_outside() -> ReferenceInstance {
    ReferenceInstance {
        name: "boundary pair, outside",
        matrix: boundary_pair(BOUNDARY_OUTSIDE),
        expected: Expected::Stalled,
        gamma: Vec::new(),
        lambda_p: None,
        lambda_q: None,
    }
}

/// Error level at which the outside boundary instance oscillates.
pub const BOUNDARY_PLATEAU: f64 = 8.5e-5;

pub fn obstructed_a11() -> Matrix<f64> {
    rows(&[[0.15, 0.0, 0.0], [0.0, 0.15, 0.0375], [0.0, 0.0, 0.2]])
}

/// The four-decimal `A12`.
pub fn obstructed_a12() -> Matrix<f64> {
    rows(&[[0.3571, 0.0, 0.0], [0.0, 0.3215, 0.1070], [0.0, 0.1070, 0.1689]])
}

/// The eigenbasis of `obstructed_a11` used to exhibit the obstruction,
/// ordered `(0.15, 0.15, 0.2)`.
pub fn obstructed_basis() -> (Matrix<f64>, Vec<(f64, usize)>) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (
        rows(&[[s, s, 0.0], [s, -s, 0.6], [0.0, 0.0, 0.8]]),
        vec![(0.15, 2), (0.2, 1)],
    )
}

/// The invertible contraction with `A11 U = U D` and
/// `U D U* = A11 A11* + A12 A12*` for the exact `A12`.
pub fn obstructed_u() -> Matrix<f64> {
    let r = 40f64.sqrt();
    rows(&[[1.0, 0.0, 0.0], [0.0, 5.0 / r, 3.0 / r], [0.0, 0.0, 4.0 / r]])
}

/// Diagonal of `D` matching `obstructed_u`.
pub const OBSTRUCTED_D: [f64; 3] = [0.15, 0.15, 0.2];

/// `A12 = (U D U* - A11 A11*)^{1/2}` computed in full precision, of which
/// `obstructed_a12` is the rounding.
pub fn obstructed_a12_exact() -> Matrix<f64> {
    use crate::hermitian::Hermitian;
    let u = obstructed_u();
    let a11 = obstructed_a11();
    let udu = &u.mul_diagonal_right(&OBSTRUCTED_D) * &u.adjoint();
    let gap = Hermitian::symmetrize(&udu - &(&a11 * &a11.adjoint()));
    gap.principal_sqrt(1e-12).expect("positive semidefinite by construction").into_matrix()
}

/// `X` for `obstructed_basis`.
pub fn obstructed_x() -> Matrix<f64> {
    rows(&[[1.3, -0.3, 0.0], [-0.3, 1.3, 0.0], [0.0, 0.0, 1.6]])
}

/// `Y = V* V` for `obstructed_basis` (rounded to four decimals).
pub fn obstructed_y() -> Matrix<f64> {
    rows(&[[1.0, 0.0, 0.4243], [0.0, 1.0, -0.4243], [0.4243, -0.4243, 1.0]])
}

/// A 6x6 instance whose sandwich problem has no solution.
pub fn obstructed_3x3() -> ReferenceInstance {
    ReferenceInstance {
        name: "obstructed 3x3",
        matrix: upper_block(&obstructed_a11(), &obstructed_a12()),
        expected: Expected::Stalled,
        gamma: Vec::new(),
        lambda_p: None,
        lambda_q: None,
    }
}

pub fn clustered_5x5_a11() -> Matrix<f64> {
    rows(&[
        [0.125, 0.0126, 0.0033, 0.024, -0.0006],
        [0.0, 0.0625, 0.0, 0.012, 0.0152],
        [0.0, 0.0, 0.0625, 0.0025, 0.0453],
        [0.0, 0.0, 0.0, 0.2, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.2],
    ])
}

pub fn clustered_5x5_a12() -> Matrix<f64> {
    rows(&[
        [0.0658, 0.0218, 0.0031, 0.05, -0.0033],
        [0.0218, 0.113, -0.0107, -0.0120, 0.0098],
        [0.0031, -0.0107, 0.0418, 0.0048, -0.0409],
        [0.0500, -0.012, 0.0048, 0.1103, 0.0037],
        [-0.0033, 0.0098, -0.0409, 0.0037, 0.128],
    ])
}

/// 10x10 instance with interior eigenvalues `0.2 (x2), 0.125, 0.0625 (x2)`.
pub fn clustered_5x5() -> ReferenceInstance {
    ReferenceInstance {
        name: "clustered 5x5",
        matrix: upper_block(&clustered_5x5_a11(), &clustered_5x5_a12()),
        expected: Expected::Decomposed,
        gamma: vec![
            block(0.125, &[&[3.4737]]),
            block(0.0625, &[&[2.3344, 0.0216], &[0.0216, 2.9472]]),
            block(0.2, &[&[2.1257, -0.2132], &[-0.2132, 1.6425]]),
        ],
        lambda_p: Some(0.7024),
        lambda_q: Some(1.0),
    }
}

pub fn clustered_7x7_a11() -> Matrix<f64> {
    rows(&[
        [0.1, 0.0244, 0.026, 0.0167, 0.0114, 0.0014, 0.0674],
        [0.0, 0.2, 0.0176, 0.0251, 0.0345, 0.0122, 0.0088],
        [0.0, 0.0, 0.3, 0.0, 0.0072, 0.0119, 0.0166],
        [0.0, 0.0, 0.0, 0.3, 0.0093, 0.0007, 0.0099],
        [0.0, 0.0, 0.0, 0.0, 0.4, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.4, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.4],
    ])
}

pub fn clustered_7x7_a12() -> Matrix<f64> {
    rows(&[
        [0.098, 0.0157, -0.0315, 0.0033, -0.04, -0.0196, 0.0171],
        [0.0157, 0.0545, -0.0366, 0.0302, 0.0081, 0.0003, 0.004],
        [-0.0315, -0.0366, 0.1246, -0.0449, -0.0005, 0.0232, -0.0047],
        [0.0033, 0.0302, -0.0449, 0.1025, -0.0193, -0.031, 0.0191],
        [-0.04, 0.0081, -0.0005, -0.0193, 0.1285, 0.0038, -0.0504],
        [-0.0196, 0.0003, 0.0232, -0.031, 0.0038, 0.07790, -0.0192],
        [0.0171, 0.004, -0.0047, 0.0191, -0.0504, -0.0192, 0.0895],
    ])
}

/// 14x14 instance with interior eigenvalues `0.4 (x3), 0.3 (x2), 0.2, 0.1`.
pub fn clustered_7x7() -> ReferenceInstance {
    ReferenceInstance {
        name: "clustered 7x7",
        matrix: upper_block(&clustered_7x7_a11(), &clustered_7x7_a12()),
        expected: Expected::Decomposed,
        gamma: vec![
            block(0.1, &[&[2.9099]]),
            block(0.2, &[&[2.592]]),
            block(0.3, &[&[1.9048, 0.1063], &[0.1063, 1.866]]),
            block(
                0.4,
                &[&[1.6447, 0.0046, 0.0768], &[0.0046, 1.6923, 0.0215], &[0.0768, 0.0215, 1.5846]],
            ),
        ],
        lambda_p: Some(0.8309),
        lambda_q: Some(1.0),
    }
}

/// All instances in a fixed order.
pub fn all() -> Vec<ReferenceInstance> {
    vec![
        triangular_2x2(),
        obstructed_3x3(),
        clustered_5x5(),
        clustered_7x7(),
        boundary_inside(),
        boundary_outside(),
    ]
}
