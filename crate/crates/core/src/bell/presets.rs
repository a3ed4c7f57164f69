//! Named scenarios and random scenario generators.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::hilbert::random::{
    dichotomous_with_signs, haar_unitary, random_dichotomous, random_nontrivial_dichotomous,
};
use crate::hilbert::{BellScenario, HermitianOperator};
use crate::scalar::Real;

fn local<T: Real>(
    a1: HermitianOperator<T>,
    a2: HermitianOperator<T>,
    b1: HermitianOperator<T>,
    b2: HermitianOperator<T>,
) -> BellScenario<T> {
    BellScenario::tensor_local(&a1, &a2, &b1, &b2).expect("preset factors are 2x2")
}

/// `A1 = σz, A2 = σx, B1 = (σz + σx)/√2, B2 = (σz − σx)/√2`; reaches ‖𝓑‖ = √2.
pub fn optimal<T: Real>() -> BellScenario<T> {
    let q = T::FRAC_PI_4();
    local(
        HermitianOperator::pauli_z(),
        HermitianOperator::pauli_x(),
        HermitianOperator::spin_xz(q),
        HermitianOperator::spin_xz(-q),
    )
}

/// Same A's as [`optimal`] with `B1 = B2`, so `[B1, B2] = 0` and ‖𝓑‖ = 1.
pub fn compatible<T: Real>() -> BellScenario<T> {
    let b = HermitianOperator::spin_xz(T::FRAC_PI_4());
    local(
        HermitianOperator::pauli_z(),
        HermitianOperator::pauli_x(),
        b.clone(),
        b,
    )
}

/// A's at 45° apart, B's at 90° apart: both pairs incompatible, ‖𝓑‖ = √(1 + 1/√2).
pub fn doubly_incompatible_nonoptimal<T: Real>() -> BellScenario<T> {
    local(
        HermitianOperator::pauli_z(),
        HermitianOperator::spin_xz(T::FRAC_PI_4()),
        HermitianOperator::pauli_z(),
        HermitianOperator::pauli_x(),
    )
}

pub fn all_identity<T: Real>() -> BellScenario<T> {
    let i = HermitianOperator::identity(2);
    local(i.clone(), i.clone(), i.clone(), i)
}

/// Tensor-local scenario of Haar-random dichotomous observables with random signs.
pub fn random_local_dichotomous<T: Real, R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> BellScenario<T>
where
    StandardNormal: Distribution<T>,
{
    let a1 = random_dichotomous(dim_a, rng);
    let a2 = random_dichotomous(dim_a, rng);
    let b1 = random_dichotomous(dim_b, rng);
    let b2 = random_dichotomous(dim_b, rng);
    local(a1, a2, b1, b2)
}

/// Random dichotomous scenario where `B2` is diagonal in `B1`'s eigenbasis, so `[B1, B2] = 0`.
pub fn random_commuting_b<T: Real, R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> BellScenario<T>
where
    StandardNormal: Distribution<T>,
{
    let a1 = random_dichotomous(dim_a, rng);
    let a2 = random_dichotomous(dim_a, rng);
    let basis = haar_unitary(dim_b, rng);
    let mut signs = || -> Vec<T> {
        (0..dim_b)
            .map(|_| {
                if rng.random::<bool>() {
                    T::one()
                } else {
                    -T::one()
                }
            })
            .collect()
    };
    let b1 = dichotomous_with_signs(&basis, &signs());
    let b2 = dichotomous_with_signs(&basis, &signs());
    local(a1, a2, b1, b2)
}

/// Random dichotomous scenario with `B1 = B2`.
pub fn random_equal_b<T: Real, R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> BellScenario<T>
where
    StandardNormal: Distribution<T>,
{
    let a1 = random_dichotomous(dim_a, rng);
    let a2 = random_dichotomous(dim_a, rng);
    let b = random_dichotomous(dim_b, rng);
    local(a1, a2, b.clone(), b)
}

/// Random scenario of observables that each have both eigenvalues ±1.
/// Generic draws are incompatible within each pair.
pub fn random_nontrivial<T: Real, R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    rng: &mut R,
) -> BellScenario<T>
where
    StandardNormal: Distribution<T>,
{
    local(
        random_nontrivial_dichotomous(dim_a, rng),
        random_nontrivial_dichotomous(dim_a, rng),
        random_nontrivial_dichotomous(dim_b, rng),
        random_nontrivial_dichotomous(dim_b, rng),
    )
}
