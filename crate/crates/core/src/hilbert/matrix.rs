use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::eigen::hermitian_eigen;
use crate::scalar::{Real, C};

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<C<T>>>", into = "Vec<Vec<C<T>>>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct ComplexMatrix<T> {
    dim: usize,
    data: Vec<C<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C::one();
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_diagonal(diag: &[C<T>]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<C<T>>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for (row, r) in rows.into_iter().enumerate() {
            if r.len() != dim {
                return Err(Error::NotSquare {
                    row,
                    len: r.len(),
                    expected: dim,
                });
            }
            data.extend(r);
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), dim * dim, "expected {dim}x{dim} entries");
        Self {
            dim,
            data: entries
                .iter()
                .map(|&x| Complex::new(T::lit(x), T::zero()))
                .collect(),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> Vec<Vec<C<T>>> {
        self.data
            .chunks(self.dim.max(1))
            .take(self.dim)
            .map(<[_]>::to_vec)
            .collect()
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, k: C<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| *z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| *z * k).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`; composite index is `i * other.dim + k`.
    pub fn kron(&self, other: &Self) -> Self {
        let (m, n) = (self.dim, other.dim);
        Self::from_fn(m * n, |r, c| self[(r / n, c / n)] * other[(r % n, c % n)])
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(self * other)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim, other.dim)?;
        Ok(self - other)
    }

    pub fn apply(&self, v: &[C<T>]) -> Result<Vec<C<T>>> {
        check_dims(self.dim, v.len())?;
        Ok(self
            .data
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| *a * *b).sum())
            .collect())
    }

    pub fn trace(&self) -> C<T> {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// `max |a_ij - conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Largest singular value, from the eigenvalues of `A^H A`.
    pub fn spectral_norm(&self) -> T {
        if self.dim == 0 {
            return T::zero();
        }
        let gram = &self.adjoint() * self;
        let eig = hermitian_eigen(&gram.hermitian_part());
        eig.values
            .iter()
            .fold(T::zero(), |acc, &l| acc.max(l))
            .sqrt()
    }

    /// `(A + A^H) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    /// Partial trace over the second factor of a `dim_a x dim_b` composite.
    pub fn partial_trace_b(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        check_factors(self.dim, dim_a, dim_b)?;
        Ok(Self::from_fn(dim_a, |a, a2| {
            (0..dim_b)
                .map(|b| self[(a * dim_b + b, a2 * dim_b + b)])
                .sum()
        }))
    }

    /// Partial trace over the first factor of a `dim_a x dim_b` composite.
    pub fn partial_trace_a(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        check_factors(self.dim, dim_a, dim_b)?;
        Ok(Self::from_fn(dim_b, |b, b2| {
            (0..dim_a)
                .map(|a| self[(a * dim_b + b, a * dim_b + b2)])
                .sum()
        }))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        check_dims(self.dim, other.dim)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max))
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimMismatch { left, right })
    }
}

pub(crate) fn check_factors(dim: usize, dim_a: usize, dim_b: usize) -> Result<()> {
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != dim {
        Err(Error::InvalidStructure { dim_a, dim_b, dim })
    } else {
        Ok(())
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = C<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out.data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o = *o + a * *b;
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| *a - *b)
                .collect(),
        }
    }
}

impl<T: Real> TryFrom<Vec<Vec<C<T>>>> for ComplexMatrix<T> {
    type Error = Error;

    fn try_from(rows: Vec<Vec<C<T>>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl<T: Real> From<ComplexMatrix<T>> for Vec<Vec<C<T>>> {
    fn from(m: ComplexMatrix<T>) -> Self {
        m.rows()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::<f64>::identity(2);
        assert_eq!(i2.kron(&i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn partial_traces_recover_factors() {
        let x = ComplexMatrix::<f64>::from_fn(2, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let y = ComplexMatrix::<f64>::from_fn(3, |i, j| c((i * j) as f64, 1.0));
        let xy = x.kron(&y);
        let tr_y = y.trace();
        let tr_x = x.trace();
        let ta = xy.partial_trace_b(2, 3).unwrap();
        let tb = xy.partial_trace_a(2, 3).unwrap();
        assert!(ta.max_abs_diff(&x.scale(tr_y)).unwrap() < 1e-12);
        assert!(tb.max_abs_diff(&y.scale(tr_x)).unwrap() < 1e-12);
        assert!(matches!(
            xy.partial_trace_b(4, 2),
            Err(Error::InvalidStructure { .. })
        ));
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![c::<f64>(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0)]];
        assert!(matches!(
            ComplexMatrix::from_rows(rows),
            Err(Error::NotSquare { row: 1, .. })
        ));
    }

    #[test]
    fn spectral_norm_of_non_normal_matrix() {
        // [[0, 2], [0, 0]] has singular values {2, 0}.
        let m = ComplexMatrix::<f64>::from_real(2, &[0.0, 2.0, 0.0, 0.0]);
        assert!((m.spectral_norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn json_uses_complex_pairs() {
        let m = ComplexMatrix::<f64>::from_fn(2, |i, j| c(i as f64, j as f64));
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[0.0,0.0],[0.0,1.0]],[[1.0,0.0],[1.0,1.0]]]");
        let back: ComplexMatrix<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
