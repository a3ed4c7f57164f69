use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Unit vector in a finite-dimensional complex Hilbert space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<C<T>>", into = "Vec<C<T>>")]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct StateVector<T> {
    amplitudes: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    /// Divides `raw` by its Euclidean norm.
    pub fn normalize(raw: &[C<T>]) -> Result<Self> {
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if raw.is_empty() || norm.is_nan() || norm <= T::zero_norm_tol() {
            return Err(Error::ZeroVector {
                norm: norm.to_f64_lossy(),
            });
        }
        Ok(Self {
            amplitudes: raw.iter().map(|z| *z / norm).collect(),
        })
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dim {dim}");
        let mut amplitudes = vec![C::zero(); dim];
        amplitudes[k] = C::one();
        Self { amplitudes }
    }

    /// Equal-weight superposition of two modes, `(|0⟩ + |1⟩)/√2`.
    pub fn balanced_pair() -> Self {
        let h = T::FRAC_1_SQRT_2();
        Self {
            amplitudes: vec![Complex::new(h, T::zero()), Complex::new(h, T::zero())],
        }
    }

    /// Two-qubit singlet `(|01⟩ - |10⟩)/√2`.
    pub fn singlet() -> Self {
        let h = T::FRAC_1_SQRT_2();
        let z = C::zero();
        Self {
            amplitudes: vec![
                z,
                Complex::new(h, T::zero()),
                Complex::new(-h, T::zero()),
                z,
            ],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    /// Born weights `|c_j|²`.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> T {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C<T>> {
        crate::hilbert::matrix::check_dims(self.dim(), other.dim())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * *b)
            .sum())
    }

    /// Product state `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| *a * *b))
            .collect();
        Self { amplitudes }
    }
}

impl<T: Real> TryFrom<Vec<C<T>>> for StateVector<T> {
    type Error = Error;

    fn try_from(raw: Vec<C<T>>) -> Result<Self> {
        Self::normalize(&raw)
    }
}

impl<T: Real> From<StateVector<T>> for Vec<C<T>> {
    fn from(s: StateVector<T>) -> Self {
        s.amplitudes
    }
}
