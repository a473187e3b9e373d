//! Invariants of the dense kernels, the projection-product test, the
//! dilation and the pipeline, over seeded random inputs.

mod common;

use common::{gaussian, hermitian, psd, psd_contraction, unitary};
use num_complex::Complex;
use posprod::schur::Schur;
use posprod::svd::{self, Svd};
use posprod::{
    build_dilation, canonicalize, decompose, dilation, is_projection_product, DecomposeConfig, Hermitian, Matrix,
    ToleranceConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dist(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    (a - b).frobenius_norm()
}

fn unitarity_defect(u: &Matrix<f64>) -> f64 {
    dist(&(&u.adjoint() * u), &Matrix::identity(u.cols()))
}

/// Direct sum of `I_ones`, 2x2 blocks `[[a, sqrt(a - a^2) + shift], [0, 0]]`
/// and `0_zeros`, conjugated by a random unitary.
fn block_sum(rng: &mut ChaCha8Rng, ones: usize, alphas: &[f64], zeros: usize, shift: f64) -> Matrix<f64> {
    let mut m = Matrix::identity(ones);
    for (k, &a) in alphas.iter().enumerate() {
        let off = (a - a * a).sqrt() + if k == 0 { shift } else { 0.0 };
        let b = Matrix::from_real_rows(&[[a, off], [0.0, 0.0]]).unwrap();
        m = m.direct_sum(&b);
    }
    m = m.direct_sum(&Matrix::zeros(zeros, zeros));
    let u = unitary(rng, m.rows());
    &(&u * &m) * &u.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..8) {
        let h = hermitian(&mut rng(seed), n);
        let eig = h.eig().unwrap();
        prop_assert!(unitarity_defect(&eig.eigenvectors) < TOL);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let back = &eig.eigenvectors.mul_diagonal_right(&eig.eigenvalues) * &eig.eigenvectors.adjoint();
        prop_assert!(dist(&back, h.matrix()) < TOL * h.matrix().frobenius_norm().max(1.0));
    }

    #[test]
    fn psd_part_is_the_nearest_psd_matrix_above(seed in any::<u64>(), n in 1usize..8) {
        let h = hermitian(&mut rng(seed), n);
        let plus = h.psd_part().unwrap();
        let scale = h.matrix().frobenius_norm().max(1.0);
        prop_assert!(plus.lambda_min().unwrap() >= -TOL * scale);
        prop_assert!(plus.sub(&h).lambda_min().unwrap() >= -TOL * scale);
        prop_assert!(dist(plus.psd_part().unwrap().matrix(), plus.matrix()) < TOL * scale);
        // H+ and H+ - H are orthogonal.
        let cross = (plus.matrix() * plus.sub(&h).matrix()).frobenius_norm();
        prop_assert!(cross < TOL * scale * scale);
    }

    #[test]
    fn principal_sqrt_squares_back(seed in any::<u64>(), n in 1usize..8) {
        let h = psd(&mut rng(seed), n, 3.0);
        let s = h.principal_sqrt(1e-10).unwrap();
        prop_assert!(s.lambda_min().unwrap() >= -TOL);
        prop_assert!(dist(&(s.matrix() * s.matrix()), h.matrix()) < TOL);
    }

    #[test]
    fn moore_penrose_is_a_generalized_inverse(seed in any::<u64>(), n in 2usize..8, k in 1usize..8) {
        let mut r = rng(seed);
        let k = k.min(n);
        let b = gaussian(&mut r, n, k);
        let h = Hermitian::symmetrize(&b * &b.adjoint());
        let pinv = h.moore_penrose(1e-9 * h.matrix().frobenius_norm()).unwrap();
        let scale = h.matrix().frobenius_norm();
        prop_assert!(dist(&(&(h.matrix() * pinv.matrix()) * h.matrix()), h.matrix()) < 1e-8 * scale);
        prop_assert!(dist(&(&(pinv.matrix() * h.matrix()) * pinv.matrix()), pinv.matrix()) < 1e-8 * pinv.matrix().frobenius_norm().max(1.0));
    }

    #[test]
    fn svd_matches_the_gram_spectrum_and_rank(seed in any::<u64>(), n in 1usize..8, k in 1usize..8) {
        let mut r = rng(seed);
        let k = k.min(n);
        let a = &gaussian(&mut r, n, k) * &gaussian(&mut r, k, n);
        let s = Svd::new(&a).unwrap();
        let scale = a.frobenius_norm();
        prop_assert_eq!(s.rank(1e-9 * scale), k);
        let mut gram = Hermitian::symmetrize(&a.adjoint() * &a).eigenvalues().unwrap();
        gram.reverse();
        let mut sv = s.singular_values.clone();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (sigma, lambda) in sv.iter().zip(&gram) {
            prop_assert!((sigma * sigma - lambda.max(0.0)).abs() < 1e-9 * scale * scale);
        }
        prop_assert!((svd::spectral_norm(&a).unwrap() - sv[0]).abs() < 1e-9 * scale);
    }

    #[test]
    fn schur_form_is_triangular_and_unitary(seed in any::<u64>(), n in 1usize..8) {
        let a = gaussian(&mut rng(seed), n, n);
        let s = Schur::new(&a).unwrap();
        prop_assert!(unitarity_defect(&s.z) < TOL);
        for i in 0..n {
            for j in 0..i {
                prop_assert!(s.t[(i, j)].norm() < TOL);
            }
        }
        prop_assert!(dist(&s.reconstruct(), &a) < TOL * a.frobenius_norm());
    }

    #[test]
    fn canonical_form_reconstructs_products(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let a = psd_contraction(&mut r, n).matrix() * psd_contraction(&mut r, n).matrix();
        let canon = canonicalize(&a, &ToleranceConfig::default()).unwrap();
        prop_assert_eq!(canon.p + canon.m + canon.q, n);
        prop_assert!(unitarity_defect(&canon.w) < TOL);
        prop_assert!(dist(&canon.reconstruct(), &a) < 1e-8);
        for z in &canon.spectrum.eigenvalues {
            prop_assert!(z.im.abs() < 1e-6 && z.re > -1e-6 && z.re < 1.0 + 1e-6, "{}", z);
        }
    }

    #[test]
    fn canonical_block_sums_are_projection_products(
        seed in any::<u64>(),
        ones in 0usize..3,
        zeros in 0usize..3,
        alphas in prop::collection::vec(0.05f64..0.95, 1..4),
    ) {
        let t = block_sum(&mut rng(seed), ones, &alphas, zeros, 0.0);
        let verdict = is_projection_product(&t, &ToleranceConfig::default()).unwrap();
        prop_assert!(verdict.holds, "{:?}", verdict.failures);
        prop_assert_eq!(verdict.ones, ones);
        prop_assert_eq!(verdict.interior.len(), alphas.len());
    }

    #[test]
    fn perturbed_block_sums_are_not(
        seed in any::<u64>(),
        ones in 0usize..3,
        zeros in 0usize..3,
        alphas in prop::collection::vec(0.05f64..0.95, 1..4),
        up in any::<bool>(),
    ) {
        let shift = if up { 0.05 } else { -0.05 };
        let t = block_sum(&mut rng(seed), ones, &alphas, zeros, shift);
        let verdict = is_projection_product(&t, &ToleranceConfig::default()).unwrap();
        prop_assert!(!verdict.holds);
        prop_assert!(!verdict.failures.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn dilation_keeps_the_nonzero_spectrum(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let a = psd_contraction(&mut r, n).matrix() * psd_contraction(&mut r, n).matrix();
        let tol = ToleranceConfig::default();
        let out = decompose(&a, &DecomposeConfig::default()).unwrap();
        let run = out.decomposed().expect("products decompose");
        let dil = build_dilation(&run.canonical, &run.decomposition.u, &run.basis.d, &tol).unwrap();
        prop_assert_eq!(dil.t_tilde.rows(), n + 2 * run.canonical.m);
        let mut want = dilation::nonzero_eigenvalues(&a, 1e-7).unwrap();
        let mut got = dilation::nonzero_eigenvalues(&dil.t_tilde, 1e-7).unwrap();
        let key = |z: &Complex<f64>| (z.re, z.im);
        want.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        got.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        prop_assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).norm() < 1e-6, "{} vs {}", g, w);
        }
        prop_assert_eq!(
            svd::rank(&dil.t_tilde, 1e-8).unwrap(),
            svd::rank(&a, 1e-8).unwrap()
        );
    }

    #[test]
    fn decompose_is_deterministic(seed in any::<u64>(), n in 2usize..5) {
        let mut r = rng(seed);
        let scale: f64 = r.gen_range(0.5..1.0);
        let a = (psd_contraction(&mut r, n).matrix() * psd_contraction(&mut r, n).matrix()).scale(scale);
        let config = DecomposeConfig::default();
        let first = decompose(&a, &config).unwrap();
        let second = decompose(&a, &config).unwrap();
        match (first.decomposed(), second.decomposed()) {
            (Some(x), Some(y)) => {
                prop_assert_eq!(x.decomposition.p.matrix(), y.decomposition.p.matrix());
                prop_assert_eq!(x.decomposition.q.matrix(), y.decomposition.q.matrix());
                prop_assert_eq!(x.solve.iterations, y.solve.iterations);
            }
            (None, None) => {}
            _ => prop_assert!(false, "outcomes differ"),
        }
    }
}
