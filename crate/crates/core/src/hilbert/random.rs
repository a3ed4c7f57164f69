//! Random states and observables for property sweeps.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hilbert::matrix::ComplexMatrix;
use crate::hilbert::operator::HermitianOperator;
use crate::hilbert::state::StateVector;
use crate::scalar::{Real, C};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T>
where
    StandardNormal: Distribution<T>,
{
    Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-distributed unitary: Gram-Schmidt on the columns of a complex Ginibre matrix.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T>
where
    StandardNormal: Distribution<T>,
{
    loop {
        let mut cols: Vec<Vec<C<T>>> = Vec::with_capacity(dim);
        let mut degenerate = false;
        for _ in 0..dim {
            let mut v: Vec<C<T>> = (0..dim).map(|_| gaussian(rng)).collect();
            // two passes of modified Gram-Schmidt for orthogonality at roundoff level
            for _ in 0..2 {
                for u in &cols {
                    let proj: C<T> = u.iter().zip(&v).map(|(a, b)| a.conj() * *b).sum();
                    for (x, y) in v.iter_mut().zip(u) {
                        *x = *x - proj * *y;
                    }
                }
            }
            let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
            if n < T::lit(1e-6) {
                degenerate = true;
                break;
            }
            v.iter_mut().for_each(|z| *z = *z / n);
            cols.push(v);
        }
        if !degenerate {
            return ComplexMatrix::from_fn(dim, |i, j| cols[j][i]);
        }
    }
}

/// `V diag(signs) V^H` with Haar `V`. Each sign is ±1 with probability ½.
pub fn random_dichotomous<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator<T>
where
    StandardNormal: Distribution<T>,
{
    let signs: Vec<T> = (0..dim)
        .map(|_| {
            if rng.random::<bool>() {
                T::one()
            } else {
                -T::one()
            }
        })
        .collect();
    dichotomous_with_signs(&haar_unitary(dim, rng), &signs)
}

/// Random dichotomous observable with both eigenvalues present (traceless when `dim` is even).
pub fn random_nontrivial_dichotomous<T: Real, R: Rng + ?Sized>(
    dim: usize,
    rng: &mut R,
) -> HermitianOperator<T>
where
    StandardNormal: Distribution<T>,
{
    let signs: Vec<T> = (0..dim)
        .map(|k| {
            if k < dim.div_ceil(2) {
                T::one()
            } else {
                -T::one()
            }
        })
        .collect();
    dichotomous_with_signs(&haar_unitary(dim, rng), &signs)
}

pub fn dichotomous_with_signs<T: Real>(
    basis: &ComplexMatrix<T>,
    signs: &[T],
) -> HermitianOperator<T> {
    HermitianOperator::from_spectrum(basis, signs).expect("unitary conjugation stays Hermitian")
}

/// Gaussian-unitary-ensemble style Hermitian matrix `(G + G^H)/2`.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator<T>
where
    StandardNormal: Distribution<T>,
{
    let g = ComplexMatrix::from_fn(dim, |_, _| gaussian(rng));
    HermitianOperator::new(g.hermitian_part()).expect("Hermitian part")
}

/// Uniformly distributed unit vector.
pub fn random_state<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector<T>
where
    StandardNormal: Distribution<T>,
{
    loop {
        let raw: Vec<C<T>> = (0..dim).map(|_| gaussian(rng)).collect();
        if let Ok(s) = StateVector::normalize(&raw) {
            return s;
        }
    }
}
