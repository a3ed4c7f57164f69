//! Click statistics: singles, coincidences, the ratio `α = pc/(p1·p2)` used as
//! the zero-delay `g⁽²⁾` estimate, the anticorrelation verdict, and CHSH from counts.
//!
//! # Uncertainty of `α`
//!
//! Each gated trial yields the indicator vector `(X1, X2, Xc)` with `Xc = X1·X2`.
//! Its covariance is
//!
//! ```text
//! Var X1 = p1(1 − p1)      Cov(X1, X2) = pc − p1·p2
//! Var X2 = p2(1 − p2)      Cov(X1, Xc) = pc(1 − p1)
//! Var Xc = pc(1 − pc)      Cov(X2, Xc) = pc(1 − p2)
//! ```
//!
//! and with gradient `∇α = (−α/p1, −α/p2, 1/(p1·p2))` the first-order
//! (delta-method) standard error is `se = √(∇αᵀ Σ ∇α / N)`, evaluated at the
//! observed frequencies. For independent channels with `p1 = p2 = p` this
//! reduces to `(1 − p)/(p·√N)`. It is exactly zero when no coincidence was seen.

use serde::{Deserialize, Serialize};

use crate::detection::ClickRecord;
use crate::error::{Error, Result};

/// Mergeable click counts. Coincidences are counted between channels 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DetectionStats {
    trials: u64,
    singles: Vec<u64>,
    coincidences: u64,
    max_clicks_per_trial: u32,
}

/// Outcome of the `g⁽²⁾(0)` estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum G2Estimate {
    Defined {
        g2: f64,
        se: f64,
    },
    /// A channel has no clicks, so `p1·p2 = 0`.
    InsufficientData,
}

impl DetectionStats {
    pub fn empty(channels: usize) -> Self {
        Self {
            trials: 0,
            singles: vec![0; channels],
            coincidences: 0,
            max_clicks_per_trial: 0,
        }
    }

    /// Adds one record.
    pub fn push(&mut self, record: &ClickRecord) -> Result<()> {
        self.push_clicks(&record.clicks)
    }

    pub(crate) fn push_clicks(&mut self, clicks: &[bool]) -> Result<()> {
        if clicks.len() != self.singles.len() {
            return Err(Error::ChannelCountMismatch {
                expected: self.singles.len(),
                found: clicks.len(),
            });
        }
        self.trials += 1;
        let mut n = 0u32;
        for (s, &c) in self.singles.iter_mut().zip(clicks) {
            if c {
                *s += 1;
                n += 1;
            }
        }
        if clicks.len() >= 2 && clicks[0] && clicks[1] {
            self.coincidences += 1;
        }
        self.max_clicks_per_trial = self.max_clicks_per_trial.max(n);
        Ok(())
    }

    /// Combines two partial accumulations (associative and commutative).
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if other.singles.len() != self.singles.len() {
            return Err(Error::ChannelCountMismatch {
                expected: self.singles.len(),
                found: other.singles.len(),
            });
        }
        self.trials += other.trials;
        for (a, b) in self.singles.iter_mut().zip(&other.singles) {
            *a += b;
        }
        self.coincidences += other.coincidences;
        self.max_clicks_per_trial = self.max_clicks_per_trial.max(other.max_clicks_per_trial);
        Ok(())
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn channels(&self) -> usize {
        self.singles.len()
    }

    pub fn singles(&self) -> &[u64] {
        &self.singles
    }

    pub fn coincidences(&self) -> u64 {
        self.coincidences
    }

    pub fn max_clicks_per_trial(&self) -> u32 {
        self.max_clicks_per_trial
    }

    fn freq(&self, n: u64) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            n as f64 / self.trials as f64
        }
    }

    pub fn p1(&self) -> f64 {
        self.freq(self.singles.first().copied().unwrap_or(0))
    }

    pub fn p2(&self) -> f64 {
        self.freq(self.singles.get(1).copied().unwrap_or(0))
    }

    pub fn pc(&self) -> f64 {
        self.freq(self.coincidences)
    }

    pub fn g2(&self) -> G2Estimate {
        let (p1, p2, pc) = (self.p1(), self.p2(), self.pc());
        if (p1 * p2).is_nan() || p1 * p2 <= 0.0 {
            return G2Estimate::InsufficientData;
        }
        let alpha = pc / (p1 * p2);
        let grad = [-alpha / p1, -alpha / p2, 1.0 / (p1 * p2)];
        let cov = [
            [p1 * (1.0 - p1), pc - p1 * p2, pc * (1.0 - p1)],
            [pc - p1 * p2, p2 * (1.0 - p2), pc * (1.0 - p2)],
            [pc * (1.0 - p1), pc * (1.0 - p2), pc * (1.0 - pc)],
        ];
        let mut var = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                var += grad[i] * cov[i][j] * grad[j];
            }
        }
        G2Estimate::Defined {
            g2: alpha,
            se: (var.max(0.0) / self.trials as f64).sqrt(),
        }
    }

    pub fn summary(&self) -> DetectionSummary {
        let (g2, se_g2, status) = match self.g2() {
            G2Estimate::Defined { g2, se } => (Some(g2), Some(se), "ok"),
            G2Estimate::InsufficientData => (None, None, "insufficient-data"),
        };
        DetectionSummary {
            trials: self.trials,
            singles: self.singles.clone(),
            coincidences: self.coincidences,
            max_clicks_per_trial: self.max_clicks_per_trial,
            p1: self.p1(),
            p2: self.p2(),
            pc: self.pc(),
            g2,
            se_g2,
            g2_status: status.to_string(),
        }
    }
}

/// Serialized view of [`DetectionStats`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSummary {
    pub trials: u64,
    pub singles: Vec<u64>,
    pub coincidences: u64,
    pub max_clicks_per_trial: u32,
    pub p1: f64,
    pub p2: f64,
    pub pc: f64,
    pub g2: Option<f64>,
    pub se_g2: Option<f64>,
    pub g2_status: String,
}

/// Exact counts over a stream of records; all records must share one channel count.
pub fn accumulate<'a, I>(records: I) -> Result<DetectionStats>
where
    I: IntoIterator<Item = &'a ClickRecord>,
{
    let mut it = records.into_iter().peekable();
    let channels = it.peek().map_or(2, |r| r.clicks.len());
    let mut st = DetectionStats::empty(channels);
    for r in it {
        st.push(r)?;
    }
    Ok(st)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrangierVerdict {
    /// `pc/(p1·p2)`.
    pub alpha: f64,
    pub se: f64,
    pub confidence_sigma: f64,
    /// `alpha ≥ 1 − confidence_sigma · se`.
    pub classical_compatible: bool,
}

impl GrangierVerdict {
    pub fn label(&self) -> &'static str {
        if self.classical_compatible {
            "classical-compatible"
        } else {
            "nonclassical"
        }
    }
}

/// Anticorrelation test: semiclassical detection requires `pc ≥ p1·p2`.
pub fn grangier_test(st: &DetectionStats, sigma: f64) -> Result<GrangierVerdict> {
    match st.g2() {
        G2Estimate::InsufficientData => Err(Error::UndefinedRatio),
        G2Estimate::Defined { g2, se } => Ok(GrangierVerdict {
            alpha: g2,
            se,
            confidence_sigma: sigma,
            classical_compatible: g2 >= 1.0 - sigma * se,
        }),
    }
}

/// Outcome counts for one CHSH setting `(A_i, B_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SettingCounts {
    pub pp: u64,
    pub pm: u64,
    pub mp: u64,
    pub mm: u64,
    /// Trials where at least one side returned no outcome (product 0).
    #[serde(default)]
    pub null: u64,
}

impl SettingCounts {
    pub fn total(&self) -> u64 {
        self.pp + self.pm + self.mp + self.mm + self.null
    }

    /// Records one trial with outcomes in `{−1, 0, +1}`.
    pub fn record(&mut self, a: i8, b: i8) {
        match (a.signum(), b.signum()) {
            (1, 1) => self.pp += 1,
            (1, -1) => self.pm += 1,
            (-1, 1) => self.mp += 1,
            (-1, -1) => self.mm += 1,
            _ => self.null += 1,
        }
    }

    /// `(n₊₊ − n₊₋ − n₋₊ + n₋₋)/n` and its binomial variance.
    fn correlator(&self) -> (f64, f64) {
        let n = self.total() as f64;
        let e = (self.pp as f64 - self.pm as f64 - self.mp as f64 + self.mm as f64) / n;
        let second = (self.pp + self.pm + self.mp + self.mm) as f64 / n;
        (e, (second - e * e).max(0.0) / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshEstimate {
    /// `½|E11 + E12 + E21 − E22|`.
    pub s: f64,
    pub se: f64,
    /// `[E11, E12, E21, E22]`.
    pub correlators: [f64; 4],
}

/// CHSH value from per-setting counts ordered `(A1B1, A1B2, A2B1, A2B2)`.
pub fn chsh_from_counts(settings: &[SettingCounts; 4]) -> Result<ChshEstimate> {
    let mut correlators = [0.0; 4];
    let mut var = 0.0;
    for (k, c) in settings.iter().enumerate() {
        if c.total() == 0 {
            return Err(Error::EmptySetting(k));
        }
        let (e, v) = c.correlator();
        correlators[k] = e;
        var += v;
    }
    let [e11, e12, e21, e22] = correlators;
    Ok(ChshEstimate {
        s: 0.5 * (e11 + e12 + e21 - e22).abs(),
        se: 0.5 * var.sqrt(),
        correlators,
    })
}
