//! CHSH analysis in operator form.
//!
//! The Bell operator is normalized with a factor ½,
//! `𝓑 = ½[A1(B1 + B2) + A2(B1 − B2)]`, so the classical bound is 1 and the
//! quantum ceiling for dichotomous observables is √2. For dichotomous
//! observables whose A's commute with the B's,
//! `𝓑² = I − ¼[A1, A2][B1, B2]`, which ties any value above 1 to
//! non-commutation inside both pairs.

mod lhv;
pub mod presets;

pub use lhv::{deterministic_strategies, lhv_chsh, LhvModel, LhvWeight, Response};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hilbert::{
    commutator, operator_norm, quadratic_form, BellScenario, ComplexMatrix, HermitianOperator,
    StateVector,
};
use crate::scalar::Real;

/// Which of the four correlators `⟨A_i B_j⟩` carries the minus sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinusPlacement {
    /// `A1B1 + A1B2 + A2B1 − A2B2`, the standard operator.
    A2B2,
    A2B1,
    A1B2,
    /// `−A1B1 + A1B2 + A2B1 + A2B2 = A1(B2 − B1) + A2(B1 + B2)`.
    A1B1,
}

impl MinusPlacement {
    pub const ALL: [MinusPlacement; 4] = [
        MinusPlacement::A2B2,
        MinusPlacement::A2B1,
        MinusPlacement::A1B2,
        MinusPlacement::A1B1,
    ];

    /// Signs of `(A1B1, A1B2, A2B1, A2B2)`.
    pub fn signs(self) -> [i8; 4] {
        match self {
            MinusPlacement::A1B1 => [-1, 1, 1, 1],
            MinusPlacement::A1B2 => [1, -1, 1, 1],
            MinusPlacement::A2B1 => [1, 1, -1, 1],
            MinusPlacement::A2B2 => [1, 1, 1, -1],
        }
    }

    pub fn is_identity(self) -> bool {
        self == MinusPlacement::A2B2
    }

    pub fn label(self) -> &'static str {
        match self {
            MinusPlacement::A2B2 => "a2b2",
            MinusPlacement::A2B1 => "a2b1",
            MinusPlacement::A1B2 => "a1b2",
            MinusPlacement::A1B1 => "a1b1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    /// At least one of the pairs `(A1, A2)`, `(B1, B2)` commutes.
    LocallyCompatible,
    /// Both pairs fail to commute.
    DoublyIncompatible,
}

/// Commutator norms below this count as zero when classifying a scenario.
pub const COMMUTATOR_ZERO_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshReport<T> {
    pub bell_norm: T,
    pub landau_residual: T,
    pub commutator_a_norm: T,
    pub commutator_b_norm: T,
    pub permutation_max: T,
    pub permutation: MinusPlacement,
    pub classification: Classification,
}

fn products<T: Real>(s: &BellScenario<T>) -> Result<[ComplexMatrix<T>; 4]> {
    let (a1, a2, b1, b2) = (s.a1.matrix(), s.a2.matrix(), s.b1.matrix(), s.b2.matrix());
    Ok([
        a1.try_mul(b1)?,
        a1.try_mul(b2)?,
        a2.try_mul(b1)?,
        a2.try_mul(b2)?,
    ])
}

/// `½ Σ ± A_i B_j` as a raw matrix (Hermitian only when the A's commute with the B's).
pub fn signed_bell_matrix<T: Real>(
    s: &BellScenario<T>,
    placement: MinusPlacement,
) -> Result<ComplexMatrix<T>> {
    s.validate()?;
    let half = T::lit(0.5);
    let mut acc = ComplexMatrix::zeros(s.dim());
    for (p, sign) in products(s)?.iter().zip(placement.signs()) {
        acc = if sign > 0 { &acc + p } else { &acc - p };
    }
    Ok(acc.scale_real(half))
}

/// `𝓑 = ½[A1(B1 + B2) + A2(B1 − B2)]`.
///
/// Fails with `NonHermitian` when the result is not self-adjoint, which happens
/// when some `A_i` does not commute with some `B_j`.
pub fn bell_operator<T: Real>(s: &BellScenario<T>) -> Result<HermitianOperator<T>> {
    signed_bell_operator(s, MinusPlacement::A2B2)
}

pub fn signed_bell_operator<T: Real>(
    s: &BellScenario<T>,
    placement: MinusPlacement,
) -> Result<HermitianOperator<T>> {
    HermitianOperator::with_tolerance(signed_bell_matrix(s, placement)?, T::boundary_tol())
}

/// CHSH correlation `½[⟨A1B1⟩ + ⟨A1B2⟩ + ⟨A2B1⟩ − ⟨A2B2⟩]` in state `psi`,
/// summed correlator by correlator.
pub fn chsh_value<T: Real>(s: &BellScenario<T>, psi: &StateVector<T>) -> Result<T> {
    s.validate()?;
    let mut total = T::zero();
    for (p, sign) in products(s)?.iter().zip(MinusPlacement::A2B2.signs()) {
        let e = quadratic_form(p, psi)?.re;
        total = if sign > 0 { total + e } else { total - e };
    }
    Ok(total * T::lit(0.5))
}

/// `‖𝓑² − (I − ¼[A1, A2][B1, B2])‖`, the spectral norm of the Landau-identity defect.
pub fn landau_residual<T: Real>(s: &BellScenario<T>) -> Result<T> {
    let b = signed_bell_matrix(s, MinusPlacement::A2B2)?;
    let b2 = &b * &b;
    let ca = commutator(&s.a1, &s.a2)?;
    let cb = commutator(&s.b1, &s.b2)?;
    let rhs = &ComplexMatrix::identity(s.dim()) - &(&ca * &cb).scale_real(T::lit(0.25));
    Ok((&b2 - &rhs).spectral_norm())
}

/// `sup_{‖ψ‖=1} |⟨𝓑⟩_ψ| = ‖𝓑‖`.
pub fn max_chsh<T: Real>(s: &BellScenario<T>) -> Result<T> {
    Ok(operator_norm(&bell_operator(s)?))
}

/// Largest `‖𝓑_σ‖` over the four placements of the minus sign, with the maximizing
/// placement. Ties resolve to the earliest placement in [`MinusPlacement::ALL`].
pub fn permutation_max<T: Real>(s: &BellScenario<T>) -> Result<(T, MinusPlacement)> {
    let tie = T::lit(1e-12);
    let mut best: Option<(T, MinusPlacement)> = None;
    for placement in MinusPlacement::ALL {
        let norm = operator_norm(&signed_bell_operator(s, placement)?);
        match best {
            Some((b, _)) if norm <= b + tie => {}
            _ => best = Some((norm, placement)),
        }
    }
    Ok(best.expect("four placements"))
}

/// Spectral norms of `[A1, A2]` and `[B1, B2]`.
pub fn commutator_norms<T: Real>(s: &BellScenario<T>) -> Result<(T, T)> {
    Ok((
        commutator(&s.a1, &s.a2)?.spectral_norm(),
        commutator(&s.b1, &s.b2)?.spectral_norm(),
    ))
}

pub fn analyze<T: Real>(s: &BellScenario<T>) -> Result<ChshReport<T>> {
    let (commutator_a_norm, commutator_b_norm) = commutator_norms(s)?;
    let (permutation_max, permutation) = permutation_max(s)?;
    let classification =
        if commutator_a_norm.min(commutator_b_norm) < T::lit(COMMUTATOR_ZERO_THRESHOLD) {
            Classification::LocallyCompatible
        } else {
            Classification::DoublyIncompatible
        };
    Ok(ChshReport {
        bell_norm: max_chsh(s)?,
        landau_residual: landau_residual(s)?,
        commutator_a_norm,
        commutator_b_norm,
        permutation_max,
        permutation,
        classification,
    })
}

/// Joint outcome probabilities `[P(++), P(+−), P(−+), P(−−)]` for measuring
/// `A_i` and `B_j` (1-based setting indices) on `psi`, using the projectors
/// `(I ± X)/2` of dichotomous observables.
pub fn joint_outcome_probabilities<T: Real>(
    s: &BellScenario<T>,
    psi: &StateVector<T>,
    i: usize,
    j: usize,
) -> Result<[T; 4]> {
    let a = if i == 1 { &s.a1 } else { &s.a2 };
    let b = if j == 1 { &s.b1 } else { &s.b2 };
    let id = ComplexMatrix::identity(s.dim());
    let half = T::lit(0.5);
    let proj = |x: &HermitianOperator<T>, sign: bool| {
        if sign {
            (&id + x.matrix()).scale_real(half)
        } else {
            (&id - x.matrix()).scale_real(half)
        }
    };
    let mut out = [T::zero(); 4];
    for (k, (sa, sb)) in [(true, true), (true, false), (false, true), (false, false)]
        .into_iter()
        .enumerate()
    {
        let p = proj(a, sa).try_mul(&proj(b, sb))?;
        out[k] = quadratic_form(&p, psi)?.re.max(T::zero());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;
    use crate::hilbert::{expectation, tensor};
    use crate::scalar::c;

    type H = HermitianOperator<f64>;
    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn bell_operator_examples() {
        let (z, i2) = (H::pauli_z(), H::identity(2));
        let s = BellScenario::tensor_local(&z, &z, &z, &z).unwrap();
        let b = bell_operator(&s).unwrap();
        let zz = tensor(&z, &z);
        assert!(b.matrix().max_abs_diff(zz.matrix()).unwrap() < 1e-15);
        assert!((operator_norm(&b) - 1.0).abs() < 1e-15);

        let id = BellScenario::tensor_local(&i2, &i2, &i2, &i2).unwrap();
        assert_eq!(bell_operator(&id).unwrap(), H::identity(4));

        assert!((operator_norm(&bell_operator(&optimal::<f64>()).unwrap()) - SQRT2).abs() < 1e-12);
    }

    #[test]
    fn bell_operator_rejects_non_commuting_parties() {
        let (x, z, i2) = (H::pauli_x(), H::pauli_z(), H::identity(2));
        let s = BellScenario::new(
            tensor(&x, &x),
            tensor(&z, &i2),
            tensor(&i2, &z),
            tensor(&i2, &z),
        )
        .unwrap();
        assert!(matches!(
            bell_operator(&s),
            Err(crate::Error::NonHermitian { .. })
        ));
    }

    #[test]
    fn chsh_value_examples() {
        let psi = StateVector::singlet();
        let v = chsh_value(&optimal::<f64>(), &psi).unwrap();
        assert!((v + SQRT2).abs() < 1e-12);

        let z = H::pauli_z();
        let s = BellScenario::tensor_local(&z, &z, &z, &z).unwrap();
        let v = chsh_value(&s, &StateVector::basis(4, 0)).unwrap();
        assert!((v - 1.0).abs() < 1e-15);

        let psi =
            StateVector::normalize(&[c(0.3, 0.1), c(-0.2, 0.5), c(0.0, 1.0), c(0.7, 0.0)]).unwrap();
        assert!((chsh_value(&all_identity::<f64>(), &psi).unwrap() - 1.0).abs() < 1e-15);
        let b = bell_operator(&optimal::<f64>()).unwrap();
        assert!(
            (chsh_value(&optimal(), &psi).unwrap() - expectation(&b, &psi).unwrap()).abs() < 1e-12
        );
    }

    #[test]
    fn landau_examples() {
        assert!(landau_residual(&optimal::<f64>()).unwrap() < 1e-12);
        assert!(landau_residual(&all_identity::<f64>()).unwrap() < 1e-15);
        // Non-dichotomous observables: A1 = 2σz breaks 𝓑² = I - ¼[..][..].
        let (x, z) = (H::pauli_x(), H::pauli_z());
        let s = BellScenario::tensor_local(&z.scaled(2.0), &x, &z, &x).unwrap();
        assert!(landau_residual(&s).unwrap() > 0.1);
    }

    #[test]
    fn max_chsh_examples() {
        assert!((max_chsh(&compatible::<f64>()).unwrap() - 1.0).abs() < 1e-12);
        assert!((max_chsh(&optimal::<f64>()).unwrap() - SQRT2).abs() < 1e-9);
        assert!((max_chsh(&all_identity::<f64>()).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn permutation_max_examples() {
        let (v, p) = permutation_max(&optimal::<f64>()).unwrap();
        assert!((v - SQRT2).abs() < 1e-9);
        assert_eq!(p, MinusPlacement::A2B2);
        // every placement reaches √2 in the optimal scenario
        for placement in MinusPlacement::ALL {
            let n = operator_norm(&signed_bell_operator(&optimal::<f64>(), placement).unwrap());
            assert!((n - SQRT2).abs() < 1e-9, "{placement:?}");
        }

        let (v, _) = permutation_max(&compatible::<f64>()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);

        let (x, z) = (H::pauli_x(), H::pauli_z());
        let s = BellScenario::tensor_local(&z, &x, &z, &x).unwrap();
        let (v, _) = permutation_max(&s).unwrap();
        assert!(v > 1.0);
        // Pauli algebra: 𝓑² = I + σy⊗σy, so ‖𝓑‖ = √2.
        assert!((v - SQRT2).abs() < 1e-12);
    }

    #[test]
    fn nonoptimal_preset_matches_pauli_closed_form() {
        // For qubit observables at angles θ_A, θ_B within each pair,
        // 𝓑² = I + sinθ_A sinθ_B (n·σ ⊗ m·σ), so ‖𝓑‖ = √(1 + |sinθ_A sinθ_B|).
        let expected = (1.0 + (std::f64::consts::FRAC_PI_4).sin()).sqrt();
        let s = doubly_incompatible_nonoptimal::<f64>();
        let (v, _) = permutation_max(&s).unwrap();
        assert!((max_chsh(&s).unwrap() - expected).abs() < 1e-12);
        assert!((v - expected).abs() < 1e-12);
    }

    #[test]
    fn analyze_examples() {
        let r = analyze(&optimal::<f64>()).unwrap();
        assert_eq!(r.classification, Classification::DoublyIncompatible);
        assert!((r.bell_norm - SQRT2).abs() < 1e-9);
        assert!((r.commutator_a_norm - 2.0).abs() < 1e-12);
        assert!((r.commutator_b_norm - 2.0).abs() < 1e-12);
        assert!(r.permutation_max >= r.bell_norm - 1e-12);

        let r = analyze(&compatible::<f64>()).unwrap();
        assert_eq!(r.classification, Classification::LocallyCompatible);
        assert!(r.bell_norm <= 1.0 + 1e-10);

        let r = analyze(&all_identity::<f64>()).unwrap();
        assert_eq!(r.classification, Classification::LocallyCompatible);
        assert!((r.bell_norm - 1.0).abs() < 1e-15);

        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["classification"], "LocallyCompatible");
        assert_eq!(json["permutation"], "a2b2");
    }

    #[test]
    fn joint_probabilities_reproduce_correlators() {
        let s = optimal::<f64>();
        let psi = StateVector::singlet();
        let mut total = 0.0;
        for (k, (i, j)) in [(1, 1), (1, 2), (2, 1), (2, 2)].into_iter().enumerate() {
            let p = joint_outcome_probabilities(&s, &psi, i, j).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let e = p[0] - p[1] - p[2] + p[3];
            total += if k == 3 { -e } else { e };
        }
        assert!((0.5 * total - chsh_value(&s, &psi).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn f32_analysis() {
        let r = analyze(&optimal::<f32>()).unwrap();
        assert!((r.bell_norm - std::f32::consts::SQRT_2).abs() < 1e-5);
        assert!(r.landau_residual < 1e-5);
    }
}
