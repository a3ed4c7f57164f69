//! Classical versus quantum entanglement, numerically.
//!
//! * [`hilbert`]: finite-dimensional states, Hermitian operators, Bell scenarios.
//! * [`bell`]: Bell operator, Landau identity, CHSH bounds, local hidden-variable models.
//! * [`fields`]: classical mode superpositions and stochastic intensity sources.
//! * [`detection`]: Born, semiclassical Poisson and threshold photodetection.
//! * [`stats`]: coincidence statistics, `g2(0)` and count-based CHSH estimates.
//! * [`experiment`]: the named experiments behind the command-line tool.
//!
//! The linear-algebra core is generic over [`Real`] (`f32`, `f64`); the aliases
//! below fix it to `f64`.

pub mod bell;
pub mod detection;
pub mod error;
pub mod experiment;
pub mod fields;
pub mod hilbert;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex = scalar::C<f64>;
pub type ComplexMatrix = hilbert::ComplexMatrix<f64>;
pub type StateVector = hilbert::StateVector<f64>;
pub type HermitianOperator = hilbert::HermitianOperator<f64>;
pub type BellScenario = hilbert::BellScenario<f64>;
pub type ChshReport = bell::ChshReport<f64>;
pub type ModeSuperposition = fields::ModeSuperposition<f64>;
pub type IntraEntangledState = fields::IntraEntangledState<f64>;
pub type LhvModel = bell::LhvModel<f64>;
/// Exact-weight LHV model.
pub type RationalLhvModel = bell::LhvModel<num_rational::Ratio<i64>>;
