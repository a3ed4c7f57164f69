//! Finite-dimensional complex Hilbert spaces: states, Hermitian observables,
//! tensor products, commutators and spectral norms.
//!
//! Matrices are dense and small (dimension at most 64 in practice).

pub mod eigen;
mod matrix;
mod operator;
pub mod random;
mod scenario;
mod state;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use matrix::ComplexMatrix;
pub use operator::HermitianOperator;
pub use scenario::BellScenario;
pub use state::StateVector;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// `raw / ‖raw‖`; fails with [`Error::ZeroVector`] when the norm is negligible.
pub fn normalize<T: Real>(raw: &[C<T>]) -> Result<StateVector<T>> {
    StateVector::normalize(raw)
}

/// Kronecker product `x ⊗ y`.
pub fn tensor<T: Real>(x: &HermitianOperator<T>, y: &HermitianOperator<T>) -> HermitianOperator<T> {
    HermitianOperator::from_computed(x.matrix().kron(y.matrix()))
        .expect("Kronecker product of Hermitian operators is Hermitian")
}

/// `XY - YX`.
pub fn commutator<T: Real>(
    x: &HermitianOperator<T>,
    y: &HermitianOperator<T>,
) -> Result<ComplexMatrix<T>> {
    let xy = x.matrix().try_mul(y.matrix())?;
    let yx = y.matrix() * x.matrix();
    Ok(&xy - &yx)
}

/// `max |λ|` over the spectrum, which equals `sup_{‖ψ‖=1} |⟨ψ|X|ψ⟩|`.
pub fn operator_norm<T: Real>(x: &HermitianOperator<T>) -> T {
    x.eigen().spectral_radius()
}

/// Operator norm of a raw matrix that should be Hermitian; rejects it when the
/// symmetry defect exceeds the boundary tolerance.
pub fn operator_norm_checked<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    let h = HermitianOperator::from_computed(m.clone())?;
    Ok(operator_norm(&h))
}

/// Real expectation value `⟨ψ|X|ψ⟩`.
pub fn expectation<T: Real>(x: &HermitianOperator<T>, psi: &StateVector<T>) -> Result<T> {
    let value = quadratic_form(x.matrix(), psi)?;
    debug_assert!(
        value.im.abs() <= T::vanishing_tol() * x.matrix().max_abs().max(T::one()),
        "imaginary residue {} in Hermitian expectation",
        value.im
    );
    Ok(value.re)
}

/// Complex `⟨ψ|M|ψ⟩` for an arbitrary square matrix.
pub fn quadratic_form<T: Real>(m: &ComplexMatrix<T>, psi: &StateVector<T>) -> Result<C<T>> {
    let mv = m.apply(psi.amplitudes())?;
    Ok(psi
        .amplitudes()
        .iter()
        .zip(&mv)
        .map(|(a, b)| a.conj() * *b)
        .fold(C::zero(), |acc, z| acc + z))
}

/// True iff every `A_i` commutes with every `B_j` and the declared factorization
/// `A_i = 𝐀_i ⊗ I`, `B_i = I ⊗ 𝐁_i` is recovered by partial traces.
pub fn verify_local_structure<T: Real>(s: &BellScenario<T>) -> Result<bool> {
    let (da, db) = s.local_structure.ok_or(Error::MissingStructure)?;
    s.validate()?;

    let commute_tol = T::vanishing_tol();
    for a in [&s.a1, &s.a2] {
        for b in [&s.b1, &s.b2] {
            let scale = (a.matrix().max_abs() * b.matrix().max_abs()).max(T::one());
            if commutator(a, b)?.frobenius_norm() >= commute_tol * scale {
                return Ok(false);
            }
        }
    }

    let factor_tol = T::boundary_tol();
    let id_a = ComplexMatrix::identity(da);
    let id_b = ComplexMatrix::identity(db);
    let inv_b = T::one() / T::lit(db as f64);
    let inv_a = T::one() / T::lit(da as f64);
    for a in [&s.a1, &s.a2] {
        let local = a.matrix().partial_trace_b(da, db)?.scale_real(inv_b);
        if a.matrix().max_abs_diff(&local.kron(&id_b))? > factor_tol {
            return Ok(false);
        }
    }
    for b in [&s.b1, &s.b2] {
        let local = b.matrix().partial_trace_a(da, db)?.scale_real(inv_a);
        if b.matrix().max_abs_diff(&id_a.kron(&local))? > factor_tol {
            return Ok(false);
        }
    }
    Ok(true)
}
