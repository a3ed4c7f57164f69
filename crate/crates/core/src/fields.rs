//! Classical fields: finite mode superpositions, the intensity Born rule, and
//! stochastic intensity sources that feed the detector models.

use std::io::Read;

use num_traits::Zero;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{hermitian_eigen, ComplexMatrix, StateVector};
use crate::scalar::{Real, C};

/// Field `Ψ = Σ_j C_j e_j` over a finite set of modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Real + Serialize",
    deserialize = "T: Real + Deserialize<'de>"
))]
pub struct ModeSuperposition<T> {
    amplitudes: Vec<C<T>>,
    #[serde(default)]
    mode_labels: Vec<String>,
}

impl<T: Real> ModeSuperposition<T> {
    pub fn new(amplitudes: Vec<C<T>>) -> Result<Self> {
        Self::labeled(amplitudes, Vec::new())
    }

    pub fn labeled(amplitudes: Vec<C<T>>, mode_labels: Vec<String>) -> Result<Self> {
        if amplitudes.iter().all(|z| z.is_zero()) {
            return Err(Error::ZeroField);
        }
        if !mode_labels.is_empty() && mode_labels.len() != amplitudes.len() {
            return Err(Error::DimMismatch {
                left: amplitudes.len(),
                right: mode_labels.len(),
            });
        }
        Ok(Self {
            amplitudes,
            mode_labels,
        })
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn mode_labels(&self) -> &[String] {
        &self.mode_labels
    }

    pub fn mode_count(&self) -> usize {
        self.amplitudes.len()
    }

    /// `I_j = |C_j|²`.
    pub fn intensity(&self, j: usize) -> Result<T> {
        self.amplitudes
            .get(j)
            .map(|z| z.norm_sqr())
            .ok_or(Error::IndexOutOfRange {
                index: j,
                len: self.amplitudes.len(),
            })
    }

    pub fn total_intensity(&self) -> T {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `p_j = I_j / Σ_k I_k`.
    pub fn classical_born(&self) -> Result<Vec<T>> {
        let total = self.total_intensity();
        if total.is_nan() || total <= T::zero() {
            return Err(Error::ZeroField);
        }
        Ok(self
            .amplitudes
            .iter()
            .map(|z| z.norm_sqr() / total)
            .collect())
    }

    /// Normalized amplitudes `c_j = C_j / √(Σ|C_k|²)`.
    pub fn normalized(&self) -> Result<StateVector<T>> {
        StateVector::normalize(&self.amplitudes)
    }
}

/// Normalized field state on `H_A ⊗ H_B` built from a `dim_a x dim_b` amplitude table.
#[derive(Debug, Clone, PartialEq)]
pub struct IntraEntangledState<T> {
    pub state: StateVector<T>,
    pub dim_a: usize,
    pub dim_b: usize,
}

/// Builds the normalized composite state with amplitude `amplitudes[a * dim_b + b]`
/// on `|a⟩ ⊗ |b⟩`.
pub fn intra_entangled_state<T: Real>(
    dim_a: usize,
    dim_b: usize,
    amplitudes: &[C<T>],
) -> Result<IntraEntangledState<T>> {
    if amplitudes.len() != dim_a * dim_b {
        return Err(Error::DimMismatch {
            left: dim_a * dim_b,
            right: amplitudes.len(),
        });
    }
    let state = StateVector::normalize(amplitudes).map_err(|_| Error::ZeroField)?;
    Ok(IntraEntangledState {
        state,
        dim_a,
        dim_b,
    })
}

impl<T: Real> IntraEntangledState<T> {
    /// Schmidt coefficients (singular values of the amplitude table), descending.
    pub fn schmidt_coefficients(&self) -> Vec<T> {
        let (da, db) = (self.dim_a, self.dim_b);
        let amp = self.state.amplitudes();
        // reduced density matrix ρ_A = M M^H
        let rho = ComplexMatrix::from_fn(da, |i, k| {
            (0..db)
                .map(|b| amp[i * db + b] * amp[k * db + b].conj())
                .sum()
        });
        let mut s: Vec<T> = hermitian_eigen(&rho)
            .values
            .into_iter()
            .map(|l| l.max(T::zero()).sqrt())
            .collect();
        s.reverse();
        s
    }

    /// Number of Schmidt coefficients above `VANISHING_TOL`; 1 means separable.
    pub fn schmidt_rank(&self) -> usize {
        self.schmidt_coefficients()
            .into_iter()
            .filter(|&s| s > T::vanishing_tol())
            .count()
    }

    pub fn is_separable(&self) -> bool {
        self.schmidt_rank() == 1
    }
}

/// Default relative Gaussian jitter on the loaded channel of the anti-correlated source.
pub const DEFAULT_JITTER: f64 = 0.05;

fn default_true() -> bool {
    true
}

fn default_jitter() -> f64 {
    DEFAULT_JITTER
}

/// Stochastic classical source producing non-negative channel intensities per trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ClassicalFieldModel {
    /// Constant intensities.
    Deterministic { intensities: Vec<f64> },
    /// Single-mode chaotic light: exponential intensity with the given channel means.
    /// When `correlated`, one draw `X ~ Exp(1)` is split as `I_j = mean_j · X`
    /// (a thermal beam on a beam splitter); otherwise channels are independent.
    Thermal {
        means: Vec<f64>,
        #[serde(default = "default_true")]
        correlated: bool,
    },
    /// Two channels. Per trial a fair coin picks the loaded channel, which gets
    /// `total·(1 − ε) + N(0, (jitter·total)²)` clamped at zero; the other gets `total·ε`.
    AntiCorrelated {
        total: f64,
        epsilon: f64,
        #[serde(default = "default_jitter")]
        jitter: f64,
    },
    /// Empirical intensity table; trial `k` replays row `k mod rows`.
    Custom { rows: Vec<Vec<f64>> },
}

/// Channel intensities of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensitySample {
    pub trial_index: u64,
    pub intensities: Vec<f64>,
}

impl ClassicalFieldModel {
    pub fn anti_correlated(total: f64, epsilon: f64) -> Self {
        ClassicalFieldModel::AntiCorrelated {
            total,
            epsilon,
            jitter: DEFAULT_JITTER,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ClassicalFieldModel::Deterministic { .. } => "deterministic",
            ClassicalFieldModel::Thermal { .. } => "thermal",
            ClassicalFieldModel::AntiCorrelated { .. } => "anti-correlated",
            ClassicalFieldModel::Custom { .. } => "custom",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        let check_list = |name: &str, v: &[f64]| -> Result<()> {
            if v.is_empty() {
                return Err(Error::InvalidModel(format!("{name} must not be empty")));
            }
            if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::InvalidModel(format!("{name} has invalid value {x}")));
            }
            Ok(())
        };
        match self {
            ClassicalFieldModel::Deterministic { intensities } => {
                check_list("intensities", intensities)
            }
            ClassicalFieldModel::Thermal {
                means,
                correlated: _,
            } => check_list("means", means),
            ClassicalFieldModel::AntiCorrelated {
                total,
                epsilon,
                jitter,
            } => {
                if !(total.is_finite() && *total > 0.0) {
                    return bad(format!("total must be positive, got {total}"));
                }
                if !(0.0..0.5).contains(epsilon) {
                    return bad(format!("epsilon must lie in [0, 0.5), got {epsilon}"));
                }
                if !(jitter.is_finite() && *jitter >= 0.0) {
                    return bad(format!("jitter must be non-negative, got {jitter}"));
                }
                Ok(())
            }
            ClassicalFieldModel::Custom { rows } => {
                let first = rows
                    .first()
                    .ok_or_else(|| Error::InvalidModel("custom table has no rows".into()))?;
                for (k, r) in rows.iter().enumerate() {
                    if r.len() != first.len() {
                        return bad(format!(
                            "row {k} has {} channels, expected {}",
                            r.len(),
                            first.len()
                        ));
                    }
                    check_list("custom row", r)?;
                }
                Ok(())
            }
        }
    }

    pub fn channel_count(&self) -> usize {
        match self {
            ClassicalFieldModel::Deterministic { intensities } => intensities.len(),
            ClassicalFieldModel::Thermal { means, .. } => means.len(),
            ClassicalFieldModel::AntiCorrelated { .. } => 2,
            ClassicalFieldModel::Custom { rows } => rows.first().map_or(0, Vec::len),
        }
    }

    /// Expected intensity per channel.
    pub fn declared_means(&self) -> Vec<f64> {
        match self {
            ClassicalFieldModel::Deterministic { intensities } => intensities.clone(),
            ClassicalFieldModel::Thermal { means, .. } => means.clone(),
            // clamping at zero shifts the mean by a term of order exp(-1/(2·jitter²)), negligible
            ClassicalFieldModel::AntiCorrelated { total, .. } => vec![0.5 * total; 2],
            ClassicalFieldModel::Custom { rows } => {
                let n = rows.len() as f64;
                let width = self.channel_count();
                (0..width)
                    .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
                    .collect()
            }
        }
    }

    /// Total intensity budget used to place a threshold: the sum of declared means.
    pub fn total_intensity(&self) -> f64 {
        match self {
            ClassicalFieldModel::AntiCorrelated { total, .. } => *total,
            _ => self.declared_means().iter().sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, trial_index: u64) -> IntensitySample {
        let mut intensities = vec![0.0; self.channel_count()];
        self.sample_into(rng, trial_index, &mut intensities);
        IntensitySample {
            trial_index,
            intensities,
        }
    }

    /// Writes one trial's intensities into `out` (length `channel_count()`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, trial_index: u64, out: &mut [f64]) {
        match self {
            ClassicalFieldModel::Deterministic { intensities } => out.copy_from_slice(intensities),
            ClassicalFieldModel::Thermal { means, correlated } => {
                if *correlated {
                    let x: f64 = Exp1.sample(rng);
                    for (o, m) in out.iter_mut().zip(means) {
                        *o = m * x;
                    }
                } else {
                    for (o, m) in out.iter_mut().zip(means) {
                        let x: f64 = Exp1.sample(rng);
                        *o = m * x;
                    }
                }
            }
            ClassicalFieldModel::AntiCorrelated {
                total,
                epsilon,
                jitter,
            } => {
                let loaded = usize::from(rng.random::<bool>());
                let noise: f64 = StandardNormal.sample(rng);
                out[loaded] = (total * (1.0 - epsilon) + jitter * total * noise).max(0.0);
                out[1 - loaded] = total * epsilon;
            }
            ClassicalFieldModel::Custom { rows } => {
                let row = &rows[(trial_index % rows.len() as u64) as usize];
                out.copy_from_slice(row);
            }
        }
    }

    /// Reads a custom intensity table with header `trial,i1,i2[,i3...]`.
    pub fn custom_from_csv<Rd: Read>(reader: Rd) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| table_error(1, e.to_string()))?
            .clone();
        let expected: Vec<String> = std::iter::once("trial".to_string())
            .chain((1..headers.len()).map(|k| format!("i{k}")))
            .collect();
        if headers.len() < 2 || headers.iter().zip(&expected).any(|(h, e)| h != e) {
            return Err(table_error(
                1,
                format!(
                    "header must be `trial,i1,i2,...`, got `{}`",
                    headers.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                table_error(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let mut row = Vec::with_capacity(record.len() - 1);
            for (col, field) in record.iter().enumerate().skip(1) {
                let v: f64 = field.parse().map_err(|_| {
                    table_error(line, format!("column i{col}: `{field}` is not a number"))
                })?;
                if !(v.is_finite() && v >= 0.0) {
                    return Err(table_error(
                        line,
                        format!("column i{col}: intensity {v} is negative or not finite"),
                    ));
                }
                row.push(v);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(table_error(1, "table has no data rows".into()));
        }
        Ok(ClassicalFieldModel::Custom { rows })
    }
}

fn table_error(line: u64, message: String) -> Error {
    Error::IntensityTable { line, message }
}
