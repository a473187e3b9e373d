//! Random test matrices built from a seeded generator.

#![allow(dead_code)]

use num_complex::Complex;
use posprod::{Hermitian, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| {
        Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-ish unitary: modified Gram-Schmidt on a complex Gaussian matrix.
pub fn unitary(rng: &mut ChaCha8Rng, n: usize) -> Matrix<f64> {
    let g = gaussian(rng, n, n);
    let mut cols: Vec<Vec<Complex<f64>>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for q in &cols {
                let dot: Complex<f64> = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= dot * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    Matrix::from_columns(n, &cols)
}

/// `U diag(spectrum) U*` for a random unitary `U`.
pub fn with_spectrum(rng: &mut ChaCha8Rng, spectrum: &[f64]) -> Hermitian<f64> {
    let u = unitary(rng, spectrum.len());
    Hermitian::symmetrize(&u.mul_diagonal_right(spectrum) * &u.adjoint())
}

/// Positive semidefinite contraction with eigenvalues uniform in `[0, 1]`.
pub fn psd_contraction(rng: &mut ChaCha8Rng, n: usize) -> Hermitian<f64> {
    let spectrum: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    with_spectrum(rng, &spectrum)
}

pub fn hermitian(rng: &mut ChaCha8Rng, n: usize) -> Hermitian<f64> {
    Hermitian::symmetrize(gaussian(rng, n, n))
}

/// Positive semidefinite with eigenvalues uniform in `[0, scale]`.
pub fn psd(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Hermitian<f64> {
    let spectrum: Vec<f64> = (0..n).map(|_| scale * rng.gen::<f64>()).collect();
    with_spectrum(rng, &spectrum)
}

/// Random composition of `n` into between one and `n` parts.
pub fn partition(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.gen_range(1..=left);
        sizes.push(s);
        left -= s;
    }
    sizes
}

/// Block-diagonal positive definite matrix on the given partition.
pub fn block_diagonal_pd(rng: &mut ChaCha8Rng, sizes: &[usize]) -> Hermitian<f64> {
    let mut out = Matrix::zeros(0, 0);
    for &s in sizes {
        let spectrum: Vec<f64> = (0..s).map(|_| 0.5 + 2.0 * rng.gen::<f64>()).collect();
        out = out.direct_sum(with_spectrum(rng, &spectrum).matrix());
    }
    Hermitian::symmetrize(out)
}
