//! Eigendecomposition of dense Hermitian matrices by cyclic complex Jacobi rotations.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies the real symmetric Jacobi rotation that annihilates
//! it. Dimensions here are small (at most a few dozen), where Jacobi is both
//! accurate and fast enough; eigenvalues come out real by construction.

use num_complex::Complex;
use num_traits::Zero;

use crate::hilbert::matrix::ComplexMatrix;
use crate::scalar::{Real, C};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in ascending order and the matching orthonormal eigenvectors (as columns).
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn vector(&self, k: usize) -> Vec<C<T>> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `max |λ|`.
    pub fn spectral_radius(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, l| acc.max(l.abs()))
    }
}

/// Diagonalizes `m`, which must be Hermitian; only its upper triangle influences the result
/// through the symmetric updates, so small asymmetries are tolerated.
pub fn hermitian_eigen<T: Real>(m: &ComplexMatrix<T>) -> HermitianEigen<T> {
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::<T>::identity(n);

    let scale = a.frobenius_norm();
    if scale > T::zero() {
        let target = T::epsilon() * scale;
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) <= target {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| {
        diag[i]
            .partial_cmp(&diag[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, |r, k| v[(r, order[k])]);
    HermitianEigen { values, vectors }
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for p in 0..n {
        for q in (p + 1)..n {
            s = s + a[(p, q)].norm_sqr();
        }
    }
    (s + s).sqrt()
}

fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r.is_zero() {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Pivot negligible against both diagonal entries: drop it without rotating.
    let tiny = T::epsilon() * T::lit(0.25);
    if r <= tiny * app.abs() && r <= tiny * aqq.abs() {
        a[(p, q)] = C::zero();
        a[(q, p)] = C::zero();
        return;
    }

    let phase = apq / r;
    let cph = phase.conj();
    let theta = (aqq - app) / (r + r);
    let t = if theta.abs() > T::lit(1e150) {
        T::one() / (theta + theta)
    } else {
        let sign = if theta < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let cos = T::one() / (t * t + T::one()).sqrt();
    let sin = t * cos;

    // U restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]].
    let u_pp = Complex::new(cos, T::zero());
    let u_pq = Complex::new(sin, T::zero());
    let u_qp = -cph * sin;
    let u_qq = cph * cos;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u_pp + akq * u_qp;
        a[(k, q)] = akp * u_pq + akq * u_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[(p, q)] = C::zero();
    a[(q, p)] = C::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u_pp + vkq * u_qp;
        v[(k, q)] = vkp * u_pq + vkq * u_qq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use proptest::prelude::*;

    fn hermitian_from(n: usize, seed: &[f64]) -> ComplexMatrix<f64> {
        let mut m = ComplexMatrix::zeros(n);
        let mut it = seed.iter().cycle();
        for i in 0..n {
            m[(i, i)] = c(*it.next().unwrap(), 0.0);
            for j in (i + 1)..n {
                let z = c(*it.next().unwrap(), *it.next().unwrap());
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    /// Closed form for 2x2 Hermitian [[a, z], [z*, d]].
    fn two_by_two_oracle(a: f64, d: f64, z: C<f64>) -> (f64, f64) {
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d) * (a - d) + z.norm_sqr()).sqrt();
        (mean - rad, mean + rad)
    }

    #[test]
    fn pauli_y_spectrum() {
        let y = ComplexMatrix::<f64>::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        });
        let e = hermitian_eigen(&y);
        assert!((e.values[0] + 1.0).abs() < 1e-15);
        assert!((e.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_and_zero_matrices() {
        let z = ComplexMatrix::<f64>::zeros(3);
        assert_eq!(hermitian_eigen(&z).values, vec![0.0; 3]);
        let i = ComplexMatrix::<f64>::identity(4).scale_real(2.5);
        let e = hermitian_eigen(&i);
        assert!(e.values.iter().all(|&l| (l - 2.5).abs() < 1e-15));
    }

    #[test]
    fn f32_decomposition() {
        let m = ComplexMatrix::<f32>::from_real(2, &[2.0, 1.0, 1.0, 2.0]);
        let e = hermitian_eigen(&m);
        assert!((e.values[0] - 1.0).abs() < 1e-6);
        assert!((e.values[1] - 3.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn matches_two_by_two_closed_form(a in -5.0..5.0f64, d in -5.0..5.0f64, re in -3.0..3.0f64, im in -3.0..3.0f64) {
            let m = hermitian_from(2, &[a, re, im, d]);
            let (lo, hi) = two_by_two_oracle(a, d, c(re, im));
            let e = hermitian_eigen(&m);
            prop_assert!((e.values[0] - lo).abs() < 1e-12);
            prop_assert!((e.values[1] - hi).abs() < 1e-12);
        }

        #[test]
        fn reconstructs_and_is_orthonormal(n in 1usize..9, seed in proptest::collection::vec(-2.0..2.0f64, 81)) {
            let m = hermitian_from(n, &seed);
            let e = hermitian_eigen(&m);
            let vh = e.vectors.adjoint();
            let gram = &vh * &e.vectors;
            prop_assert!(gram.max_abs_diff(&ComplexMatrix::identity(n)).unwrap() < 1e-9);
            let lambda = ComplexMatrix::from_diagonal(&e.values.iter().map(|&l| c(l, 0.0)).collect::<Vec<_>>());
            let back = &(&e.vectors * &lambda) * &vh;
            prop_assert!(back.max_abs_diff(&m).unwrap() < 1e-10);
            // trace identities: sum λ = tr A, sum λ² = tr A²
            let tr = m.trace();
            let tr2 = (&m * &m).trace();
            prop_assert!((e.values.iter().sum::<f64>() - tr.re).abs() < 1e-10);
            prop_assert!((e.values.iter().map(|l| l * l).sum::<f64>() - tr2.re).abs() < 1e-9);
            prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
