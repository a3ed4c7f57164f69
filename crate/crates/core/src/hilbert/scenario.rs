use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hilbert::matrix::{check_dims, check_factors};
use crate::hilbert::operator::HermitianOperator;
use crate::scalar::Real;

/// Four observables `A1, A2` (first party) and `B1, B2` (second party) on a common space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct BellScenario<T> {
    pub a1: HermitianOperator<T>,
    pub a2: HermitianOperator<T>,
    pub b1: HermitianOperator<T>,
    pub b2: HermitianOperator<T>,
    /// `(dim_a, dim_b)` when the space is declared as `H_A ⊗ H_B`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_structure: Option<(usize, usize)>,
}

impl<T: Real> BellScenario<T> {
    pub fn new(
        a1: HermitianOperator<T>,
        a2: HermitianOperator<T>,
        b1: HermitianOperator<T>,
        b2: HermitianOperator<T>,
    ) -> Result<Self> {
        let d = a1.dim();
        for op in [&a2, &b1, &b2] {
            check_dims(d, op.dim())?;
        }
        Ok(Self {
            a1,
            a2,
            b1,
            b2,
            local_structure: None,
        })
    }

    /// Builds `A_i = 𝐀_i ⊗ I` and `B_i = I ⊗ 𝐁_i` from local factors.
    pub fn tensor_local(
        a1: &HermitianOperator<T>,
        a2: &HermitianOperator<T>,
        b1: &HermitianOperator<T>,
        b2: &HermitianOperator<T>,
    ) -> Result<Self> {
        check_dims(a1.dim(), a2.dim())?;
        check_dims(b1.dim(), b2.dim())?;
        let ia = HermitianOperator::identity(a1.dim());
        let ib = HermitianOperator::identity(b1.dim());
        let mut s = Self::new(
            super::tensor(a1, &ib),
            super::tensor(a2, &ib),
            super::tensor(&ia, b1),
            super::tensor(&ia, b2),
        )?;
        s.local_structure = Some((a1.dim(), b1.dim()));
        Ok(s)
    }

    pub fn with_local_structure(mut self, dim_a: usize, dim_b: usize) -> Result<Self> {
        check_factors(self.dim(), dim_a, dim_b)?;
        self.local_structure = Some((dim_a, dim_b));
        Ok(self)
    }

    /// Checks dimensions and declared structure, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for op in [&self.a2, &self.b1, &self.b2] {
            check_dims(d, op.dim())?;
        }
        if let Some((da, db)) = self.local_structure {
            check_factors(d, da, db)?;
        }
        Ok(())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.a1.dim()
    }

    pub fn operators(&self) -> [&HermitianOperator<T>; 4] {
        [&self.a1, &self.a2, &self.b1, &self.b2]
    }

    /// Every observable has spectrum in `{-1, +1}` (within `BOUNDARY_TOL`).
    pub fn is_dichotomous(&self) -> bool {
        self.operators().iter().all(|op| op.is_dichotomous())
    }
}
