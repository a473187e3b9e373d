//! Complex Schur decomposition `A = Z T Z*` and diagonal reordering.
//!
//! Householder reduction to Hessenberg form followed by single-shift QR with
//! Wilkinson shifts. Reordering swaps adjacent diagonal entries with one
//! Givens rotation each, so `Z` stays unitary to working precision.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Upper triangular `t` and unitary `z` with `A = z t z*`.
#[derive(Clone, Debug)]
pub struct Schur<T> {
    pub t: Matrix<T>,
    pub z: Matrix<T>,
}

/// Plane rotation `G = [[c, s], [-conj(s), c]]` with real `c`.
#[derive(Clone, Copy, Debug)]
struct Givens<T> {
    c: T,
    s: Complex<T>,
}

impl<T: Real> Givens<T> {
    /// Rotation with `G [x; y] = [r; 0]`.
    fn zeroing(x: Complex<T>, y: Complex<T>) -> Self {
        let ax = x.norm();
        let ay = y.norm();
        if ay == T::zero() {
            return Self { c: T::one(), s: Complex::zero() };
        }
        if ax == T::zero() {
            return Self { c: T::zero(), s: Complex::new(T::one(), T::zero()) };
        }
        let r = ax.hypot(ay);
        Self {
            c: ax / r,
            s: (x / ax) * y.conj() / r,
        }
    }

    /// Rows `(i, i+1)` of `m`, columns `from..`: `rows <- G rows`.
    fn rows(&self, m: &mut Matrix<T>, i: usize, from: usize) {
        for k in from..m.cols() {
            let a = m[(i, k)];
            let b = m[(i + 1, k)];
            m[(i, k)] = a * self.c + self.s * b;
            m[(i + 1, k)] = b * self.c - self.s.conj() * a;
        }
    }

    /// Columns `(j, j+1)` of `m`, rows `..upto`: `cols <- cols G*`.
    fn cols(&self, m: &mut Matrix<T>, j: usize, upto: usize) {
        for k in 0..upto {
            let a = m[(k, j)];
            let b = m[(k, j + 1)];
            m[(k, j)] = a * self.c + b * self.s.conj();
            m[(k, j + 1)] = b * self.c - a * self.s;
        }
    }
}

impl<T: Real> Schur<T> {
    pub fn new(a: &Matrix<T>) -> Result<Self> {
        a.ensure_square()?;
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let (mut h, mut z) = hessenberg(a);
        qr_iterate(&mut h, &mut z)?;
        let n = h.rows();
        for i in 0..n {
            for j in 0..i {
                h[(i, j)] = Complex::zero();
            }
        }
        Ok(Self { t: h, z })
    }

    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        self.t.diagonal()
    }

    /// Swaps the diagonal entries at `k` and `k + 1`.
    pub fn swap_adjacent(&mut self, k: usize) {
        let n = self.t.rows();
        assert!(k + 1 < n, "swap index out of range");
        let t11 = self.t[(k, k)];
        let t22 = self.t[(k + 1, k + 1)];
        let g = Givens::zeroing(self.t[(k, k + 1)], t22 - t11);
        g.rows(&mut self.t, k, k + 2);
        g.cols(&mut self.t, k, k);
        g.cols(&mut self.z, k, n);
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
        self.t[(k + 1, k)] = Complex::zero();
    }

    /// Stable reorder of the diagonal so that `keys` (one per current
    /// diagonal position) end up ascending. Equal keys keep their relative order.
    pub fn reorder_by_keys<K: PartialOrd + Copy>(&mut self, mut keys: Vec<K>) {
        let n = self.t.rows();
        assert_eq!(keys.len(), n);
        for pos in 0..n {
            let mut best = pos;
            for j in (pos + 1)..n {
                if keys[j] < keys[best] {
                    best = j;
                }
            }
            for j in (pos..best).rev() {
                self.swap_adjacent(j);
                keys.swap(j, j + 1);
            }
        }
    }

    /// `z t z*`.
    pub fn reconstruct(&self) -> Matrix<T> {
        &(&self.z * &self.t) * &self.z.adjoint()
    }
}

/// Householder reduction `A = Z H Z*` with `H` upper Hessenberg. Columns
/// whose subdiagonal part is already zero are left alone, so triangular
/// input comes back with `Z = I`.
fn hessenberg<T: Real>(a: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let n = a.rows();
    let mut h = a.clone();
    let mut z = Matrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let tail: T = ((k + 2)..n).map(|i| h[(i, k)].norm_sqr()).sum();
        if tail == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let norm = (tail + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() == T::zero() {
            Complex::new(T::one(), T::zero())
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex<T>> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|x| x.norm_sqr()).sum();
        let two = T::lit(2.0) / vnorm2;
        // H <- (I - 2 v v*/|v|^2) H on rows k+1.., then H <- H (I - ...) on cols k+1..
        for j in 0..n {
            let mut s = Complex::zero();
            for (r, vr) in v.iter().enumerate() {
                s += vr.conj() * h[(k + 1 + r, j)];
            }
            s = s * two;
            for (r, vr) in v.iter().enumerate() {
                h[(k + 1 + r, j)] -= *vr * s;
            }
        }
        for mat in [&mut h, &mut z] {
            for i in 0..n {
                let mut s = Complex::zero();
                for (r, vr) in v.iter().enumerate() {
                    s += mat[(i, k + 1 + r)] * *vr;
                }
                s = s * two;
                for (r, vr) in v.iter().enumerate() {
                    mat[(i, k + 1 + r)] -= s * vr.conj();
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in (k + 2)..n {
            h[(i, k)] = Complex::zero();
        }
    }
    (h, z)
}

fn qr_iterate<T: Real>(h: &mut Matrix<T>, z: &mut Matrix<T>) -> Result<()> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let eps = T::epsilon();
    let scale = h.max_abs().max(T::min_positive_value());
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = 60 * n;
    while hi > 0 {
        // Find the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let thr = if diag == T::zero() { eps * scale } else { eps * diag };
            if sub <= thr {
                h[(lo, lo - 1)] = Complex::zero();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > budget {
            return Err(Error::NonConvergence("complex Schur QR iteration"));
        }
        let mu = if iter % 10 == 0 {
            // Exceptional shift to break cycles.
            let s = h[(hi, hi - 1)].re.abs() + if hi >= 2 { h[(hi - 1, hi - 2)].re.abs() } else { T::zero() };
            h[(hi, hi)] + Complex::new(s * T::lit(0.75), s * T::lit(0.25))
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let g = Givens::zeroing(h[(k, k)], h[(k + 1, k)]);
            g.rows(h, k, k);
            h[(k + 1, k)] = Complex::zero();
            rots.push(g);
        }
        for (idx, g) in rots.iter().enumerate() {
            let k = lo + idx;
            g.cols(h, k, (k + 2).min(hi + 1));
            // Rows above the active window also see the column rotation.
            g.cols(z, k, n);
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closer to `d`.
fn wilkinson_shift<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let m = (a + d) * half;
    let delta = ((a - d) * half) * ((a - d) * half) + b * c;
    let r = delta.sqrt();
    let l1 = m + r;
    let l2 = m - r;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}
