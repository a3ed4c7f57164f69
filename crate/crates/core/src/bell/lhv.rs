//! Local hidden-variable models: a finite sample space `Λ` with weights and a
//! single-valued response `ξ(λ) ∈ {−1, 0, +1}` for each of `A1, A2, B1, B2`
//! (0 stands for a non-detection).
//!
//! Weights are generic so that sweeps can run in exact rational arithmetic.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Responses `[ξ_A1, ξ_A2, ξ_B1, ξ_B2]` for one point of the sample space.
pub type Response = [i8; 4];

pub trait LhvWeight: Num + Signed + PartialOrd + Clone + Debug + FromPrimitive {
    /// Allowed deviation of `Σ w` from 1.
    fn sum_tolerance() -> Self;
}

impl LhvWeight for f64 {
    fn sum_tolerance() -> Self {
        1e-12
    }
}

impl LhvWeight for Ratio<i64> {
    fn sum_tolerance() -> Self {
        Ratio::zero()
    }
}

impl LhvWeight for Ratio<i128> {
    fn sum_tolerance() -> Self {
        Ratio::zero()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvModel<W> {
    weights: Vec<W>,
    responses: Vec<Response>,
}

impl<W: LhvWeight> LhvModel<W> {
    pub fn new(weights: Vec<W>, responses: Vec<Response>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty sample space".into()));
        }
        if weights.len() != responses.len() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} response rows",
                weights.len(),
                responses.len()
            )));
        }
        if let Some(k) = weights.iter().position(|w| w.is_negative()) {
            return Err(Error::InvalidWeights(format!("weight {k} is negative")));
        }
        let total = weights.iter().cloned().fold(W::zero(), |a, b| a + b);
        if (total.clone() - W::one()).abs() > W::sum_tolerance() {
            return Err(Error::InvalidWeights(format!("weights sum to {total:?}")));
        }
        for (lambda, r) in responses.iter().enumerate() {
            if let Some(&value) = r.iter().find(|v| !(-1..=1).contains(*v)) {
                return Err(Error::InvalidResponse { lambda, value });
            }
        }
        Ok(Self { weights, responses })
    }

    /// Single deterministic strategy with weight one.
    pub fn deterministic(response: Response) -> Result<Self> {
        Self::new(vec![W::one()], vec![response])
    }

    pub fn sample_space_size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[W] {
        &self.weights
    }

    pub fn responses(&self) -> &[Response] {
        &self.responses
    }

    /// `E_ij = Σ_λ w(λ) ξ_Ai(λ) ξ_Bj(λ)` ordered `[E11, E12, E21, E22]`.
    pub fn correlators(&self) -> [W; 4] {
        let mut e = [W::zero(), W::zero(), W::zero(), W::zero()];
        for (w, r) in self.weights.iter().zip(&self.responses) {
            for (k, (i, j)) in [(0, 2), (0, 3), (1, 2), (1, 3)].into_iter().enumerate() {
                let product = r[i] * r[j];
                if product != 0 {
                    let term = w.clone() * W::from_i8(product).expect("small integer");
                    e[k] = e[k].clone() + term;
                }
            }
        }
        e
    }
}

/// `S = ½|E11 + E12 + E21 − E22|`.
pub fn lhv_chsh<W: LhvWeight>(m: &LhvModel<W>) -> W {
    let [e11, e12, e21, e22] = m.correlators();
    let two = W::one() + W::one();
    (e11 + e12 + e21 - e22).abs() / two
}

/// All `3⁴ = 81` deterministic response patterns over `{−1, 0, +1}`.
pub fn deterministic_strategies() -> impl Iterator<Item = Response> {
    (0..81u32).map(|mut code| {
        let mut r = [0i8; 4];
        for slot in &mut r {
            *slot = (code % 3) as i8 - 1;
            code /= 3;
        }
        r
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    type Q = Ratio<i64>;

    #[test]
    fn all_plus_strategy_gives_one() {
        let m = LhvModel::<f64>::deterministic([1, 1, 1, 1]).unwrap();
        assert_eq!(lhv_chsh(&m), 1.0);
    }

    #[test]
    fn non_detection_gives_zero() {
        let m = LhvModel::<Q>::deterministic([0, 0, 0, 0]).unwrap();
        assert_eq!(lhv_chsh(&m), Q::zero());
    }

    #[test]
    fn enumeration_covers_all_patterns_and_caps_at_one() {
        let all: HashSet<Response> = deterministic_strategies().collect();
        assert_eq!(all.len(), 81);
        let max = deterministic_strategies()
            .map(|r| lhv_chsh(&LhvModel::<Q>::deterministic(r).unwrap()))
            .max()
            .unwrap();
        assert_eq!(max, Q::from_integer(1));
    }

    #[test]
    fn rejects_bad_models() {
        assert!(matches!(
            LhvModel::<f64>::new(vec![0.5, 0.4], vec![[1; 4], [1; 4]]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            LhvModel::<f64>::new(vec![1.5, -0.5], vec![[1; 4], [1; 4]]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            LhvModel::<f64>::new(vec![], vec![]),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            LhvModel::<f64>::new(vec![1.0], vec![[1, 2, 0, 0]]),
            Err(Error::InvalidResponse {
                lambda: 0,
                value: 2
            })
        ));
        // exact arithmetic has no slack
        let third = Q::new(1, 3);
        assert!(LhvModel::new(vec![third; 3], vec![[1; 4]; 3]).is_ok());
        assert!(LhvModel::new(vec![third, third, Q::new(1, 4)], vec![[1; 4]; 3]).is_err());
    }
}
