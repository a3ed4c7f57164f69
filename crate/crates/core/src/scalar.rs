//! Scalar abstraction shared by the linear-algebra and Bell-operator code.
//!
//! Everything in [`crate::hilbert`] and [`crate::bell`] is generic over a
//! [`Real`] type. `f64` is the working precision; `f32` is supported with
//! tolerances scaled to its epsilon.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating point type usable as the component type of complex amplitudes.
pub trait Real:
    Float + FloatConst + FromPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Hermiticity tolerance applied when an operator is constructed from raw entries.
    const CONSTRUCTION_TOL: f64;
    /// Hermiticity tolerance at operation boundaries, after accumulated roundoff.
    const BOUNDARY_TOL: f64;
    /// Norm below which a vector is treated as zero.
    const ZERO_NORM_TOL: f64;
    /// Tolerance for "this quantity vanishes" checks on O(1) quantities
    /// (imaginary residues, commutators, singular values).
    const VANISHING_TOL: f64;

    /// Converts an `f64` literal. Panics only for values not representable at all (NaN is kept).
    #[inline]
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn construction_tol() -> Self {
        Self::lit(Self::CONSTRUCTION_TOL)
    }

    #[inline]
    fn boundary_tol() -> Self {
        Self::lit(Self::BOUNDARY_TOL)
    }

    #[inline]
    fn zero_norm_tol() -> Self {
        Self::lit(Self::ZERO_NORM_TOL)
    }

    #[inline]
    fn vanishing_tol() -> Self {
        Self::lit(Self::VANISHING_TOL)
    }
}

impl Real for f64 {
    const CONSTRUCTION_TOL: f64 = 1e-12;
    const BOUNDARY_TOL: f64 = 1e-9;
    const ZERO_NORM_TOL: f64 = 1e-15;
    const VANISHING_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const CONSTRUCTION_TOL: f64 = 1e-5;
    const BOUNDARY_TOL: f64 = 1e-4;
    const ZERO_NORM_TOL: f64 = 1e-30;
    const VANISHING_TOL: f64 = 1e-4;
}

/// Complex number over a [`Real`] component type.
pub type C<T> = Complex<T>;

#[cfg(test)]
pub(crate) fn c<T: Real>(re: f64, im: f64) -> C<T> {
    Complex::new(T::lit(re), T::lit(im))
}
