use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::eigen::{hermitian_eigen, HermitianEigen};
use crate::hilbert::matrix::{check_dims, ComplexMatrix};
use crate::scalar::{Real, C};

/// Complex square matrix with Hermitian symmetry.
///
/// Construction checks `|a_ij - conj(a_ji)|` against a tolerance relative to the
/// largest entry, then stores the exact Hermitian part, so every instance is
/// exactly self-adjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix<T>", into = "ComplexMatrix<T>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct HermitianOperator<T> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tolerance(matrix, T::construction_tol())
    }

    /// Accepts `matrix` if it is Hermitian to within `tol` (scaled by `max(1, max|a_ij|)`).
    pub fn with_tolerance(matrix: ComplexMatrix<T>, tol: T) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        let scale = matrix.max_abs().max(T::one());
        if defect.is_nan() || defect > tol * scale {
            return Err(Error::NonHermitian {
                defect: defect.to_f64_lossy(),
            });
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
        })
    }

    /// Boundary check for results of arithmetic on Hermitian inputs.
    pub(crate) fn from_computed(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tolerance(matrix, T::boundary_tol())
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let d: Vec<C<T>> = diag.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self {
            matrix: ComplexMatrix::from_diagonal(&d),
        }
    }

    /// `V diag(λ) V^H` for unitary `V`.
    pub fn from_spectrum(vectors: &ComplexMatrix<T>, eigenvalues: &[T]) -> Result<Self> {
        check_dims(vectors.dim(), eigenvalues.len())?;
        let d: Vec<C<T>> = eigenvalues
            .iter()
            .map(|&x| Complex::new(x, T::zero()))
            .collect();
        let m = &(vectors * &ComplexMatrix::from_diagonal(&d)) * &vectors.adjoint();
        Self::from_computed(m)
    }

    pub fn pauli_x() -> Self {
        Self {
            matrix: ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]),
        }
    }

    pub fn pauli_y() -> Self {
        let i = Complex::new(T::zero(), T::one());
        Self {
            matrix: ComplexMatrix::from_fn(2, |r, c| match (r, c) {
                (0, 1) => -i,
                (1, 0) => i,
                _ => C::zero(),
            }),
        }
    }

    pub fn pauli_z() -> Self {
        Self {
            matrix: ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]),
        }
    }

    /// Spin observable `n·σ` along the unit vector `n` in the x-z plane at angle `theta` from z.
    pub fn spin_xz(theta: T) -> Self {
        let (s, c) = theta.sin_cos();
        Self::pauli_z()
            .scaled(c)
            .plus(&Self::pauli_x().scaled(s))
            .expect("2x2 operators")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn scaled(&self, k: T) -> Self {
        Self {
            matrix: self.matrix.scale_real(k),
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.try_add(&other.matrix)?,
        })
    }

    pub fn minus(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            matrix: self.matrix.try_sub(&other.matrix)?,
        })
    }

    pub fn eigen(&self) -> HermitianEigen<T> {
        hermitian_eigen(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.eigen().values
    }

    /// True when every eigenvalue lies within `BOUNDARY_TOL` of ±1 (so `X² = I`).
    pub fn is_dichotomous(&self) -> bool {
        let tol = T::boundary_tol();
        self.eigenvalues()
            .iter()
            .all(|&l| (l - T::one()).abs() <= tol || (l + T::one()).abs() <= tol)
    }

    pub fn is_identity(&self, tol: T) -> bool {
        self.matrix
            .max_abs_diff(&ComplexMatrix::identity(self.dim()))
            .map(|d| d <= tol)
            .unwrap_or(false)
    }
}

impl<T: Real> TryFrom<ComplexMatrix<T>> for HermitianOperator<T> {
    type Error = Error;

    fn try_from(m: ComplexMatrix<T>) -> Result<Self> {
        Self::new(m)
    }
}

impl<T: Real> From<HermitianOperator<T>> for ComplexMatrix<T> {
    fn from(h: HermitianOperator<T>) -> Self {
        h.matrix
    }
}

impl<T: Real> AsRef<ComplexMatrix<T>> for HermitianOperator<T> {
    fn as_ref(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }
}
