//! Detector models.
//!
//! * Quantum Born detection: a single excitation clicks exactly one channel,
//!   channel `j` with probability `|c_j|²`.
//! * Semiclassical Poisson detection: given the channel intensities of a trial,
//!   each channel clicks independently with probability `1 − exp(−(η·I_j + d)·Δt)`.
//! * Threshold detection: channel `j` clicks iff `I_j > θ`.
//!
//! All runs draw trial `k` from its own counter-based stream (see [`crate::rng`]),
//! so outputs depend only on `(source, detector, trials, seed)`.

use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{joint_outcome_probabilities, LhvModel};
use crate::error::{Error, Result};
use crate::fields::{ClassicalFieldModel, IntensitySample};
use crate::hilbert::{BellScenario, StateVector};
use crate::rng::TrialStreams;
use crate::stats::{DetectionStats, SettingCounts};

/// Binary detector outcomes of one trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickRecord {
    pub trial_index: u64,
    pub clicks: Vec<bool>,
}

impl ClickRecord {
    pub fn click_count(&self) -> usize {
        self.clicks.iter().filter(|&&c| c).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonDetector {
    /// Quantum efficiency η ∈ (0, 1].
    pub efficiency: f64,
    /// Gate window Δt.
    pub gate_time: f64,
    /// Dark-count rate; zero for ideal detectors.
    #[serde(default)]
    pub dark_count_rate: f64,
}

impl PoissonDetector {
    pub fn new(efficiency: f64, gate_time: f64) -> Self {
        Self {
            efficiency,
            gate_time,
            dark_count_rate: 0.0,
        }
    }

    /// Probability of at least one photoelectron in the gate for intensity `i`.
    #[inline]
    pub fn click_probability(&self, intensity: f64) -> f64 {
        let mean = (self.efficiency * intensity + self.dark_count_rate) * self.gate_time;
        -(-mean).exp_m1()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::InvalidDetector(format!(
                "efficiency must lie in (0, 1], got {}",
                self.efficiency
            )));
        }
        if !(self.gate_time.is_finite() && self.gate_time > 0.0) {
            return Err(Error::InvalidDetector(format!(
                "gate_time must be positive, got {}",
                self.gate_time
            )));
        }
        if !(self.dark_count_rate.is_finite() && self.dark_count_rate >= 0.0) {
            return Err(Error::InvalidDetector(format!(
                "dark_count_rate must be non-negative, got {}",
                self.dark_count_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdDetector {
    pub threshold: f64,
}

impl ThresholdDetector {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::InvalidDetector(format!(
                "threshold must be non-negative, got {}",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DetectorConfig {
    QuantumBorn,
    SemiclassicalPoisson(PoissonDetector),
    Threshold(ThresholdDetector),
}

impl DetectorConfig {
    pub fn name(&self) -> &'static str {
        match self {
            DetectorConfig::QuantumBorn => "quantum-born",
            DetectorConfig::SemiclassicalPoisson(_) => "semiclassical-poisson",
            DetectorConfig::Threshold(_) => "threshold",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DetectorConfig::QuantumBorn => Ok(()),
            DetectorConfig::SemiclassicalPoisson(d) => d.validate(),
            DetectorConfig::Threshold(d) => d.validate(),
        }
    }
}

/// Light entering the detectors.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    /// Single-excitation state over the detector channels.
    Quantum(StateVector<f64>),
    Classical(ClassicalFieldModel),
}

impl Source {
    pub fn channel_count(&self) -> usize {
        match self {
            Source::Quantum(psi) => psi.dim(),
            Source::Classical(m) => m.channel_count(),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Source::Quantum(_) => "quantum",
            Source::Classical(_) => "classical-field",
        }
    }
}

/// Samples the clicked channel from the Born weights `|c_j|²`; exactly one channel clicks.
pub fn quantum_detect<R: Rng + ?Sized>(
    psi: &StateVector<f64>,
    rng: &mut R,
    trial_index: u64,
) -> ClickRecord {
    let mut clicks = vec![false; psi.dim()];
    clicks[born_index(psi, rng)] = true;
    ClickRecord {
        trial_index,
        clicks,
    }
}

fn born_index<R: Rng + ?Sized>(psi: &StateVector<f64>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (j, z) in psi.amplitudes().iter().enumerate() {
        let p = z.norm_sqr();
        if p > 0.0 {
            last_nonzero = j;
            acc += p;
            if u < acc {
                return j;
            }
        }
    }
    // u landed in the roundoff gap above Σ|c_j|² ≈ 1
    last_nonzero
}

/// Independent Poisson photoelectron conversion in each channel.
pub fn semiclassical_detect<R: Rng + ?Sized>(
    sample: &IntensitySample,
    detector: &PoissonDetector,
    rng: &mut R,
) -> ClickRecord {
    let mut clicks = vec![false; sample.intensities.len()];
    poisson_clicks(&sample.intensities, detector, rng, &mut clicks);
    ClickRecord {
        trial_index: sample.trial_index,
        clicks,
    }
}

fn poisson_clicks<R: Rng + ?Sized>(
    intensities: &[f64],
    detector: &PoissonDetector,
    rng: &mut R,
    out: &mut [bool],
) {
    for (c, &i) in out.iter_mut().zip(intensities) {
        let p = detector.click_probability(i);
        *c = p > 0.0 && rng.random::<f64>() < p;
    }
}

/// Channel `j` clicks iff `I_j > θ`.
pub fn threshold_detect(sample: &IntensitySample, detector: &ThresholdDetector) -> ClickRecord {
    ClickRecord {
        trial_index: sample.trial_index,
        clicks: sample
            .intensities
            .iter()
            .map(|&i| i > detector.threshold)
            .collect(),
    }
}

/// A validated pairing of source and detector that can replay any trial.
#[derive(Debug, Clone)]
pub struct Experiment {
    source: Source,
    detector: DetectorConfig,
    streams: TrialStreams,
}

impl Experiment {
    pub fn new(source: Source, detector: DetectorConfig, seed: u64) -> Result<Self> {
        detector.validate()?;
        match (&source, &detector) {
            (Source::Quantum(_), DetectorConfig::QuantumBorn) => {}
            (
                Source::Classical(m),
                DetectorConfig::SemiclassicalPoisson(_) | DetectorConfig::Threshold(_),
            ) => m.validate()?,
            _ => {
                return Err(Error::IncompatibleSourceDetector {
                    source_kind: source.kind(),
                    detector: detector.name(),
                })
            }
        }
        Ok(Self {
            source,
            detector,
            streams: TrialStreams::new(seed),
        })
    }

    pub fn channel_count(&self) -> usize {
        self.source.channel_count()
    }

    /// Fills `clicks` with the outcome of trial `k`; `scratch` holds intensities.
    fn trial_into(&self, k: u64, scratch: &mut [f64], clicks: &mut [bool]) {
        let mut rng: ChaCha8Rng = self.streams.trial(k);
        match (&self.source, &self.detector) {
            (Source::Quantum(psi), _) => {
                clicks.fill(false);
                clicks[born_index(psi, &mut rng)] = true;
            }
            (Source::Classical(m), DetectorConfig::SemiclassicalPoisson(d)) => {
                m.sample_into(&mut rng, k, scratch);
                poisson_clicks(scratch, d, &mut rng, clicks);
            }
            (Source::Classical(m), DetectorConfig::Threshold(d)) => {
                m.sample_into(&mut rng, k, scratch);
                for (c, &i) in clicks.iter_mut().zip(scratch.iter()) {
                    *c = i > d.threshold;
                }
            }
            (Source::Classical(_), DetectorConfig::QuantumBorn) => {
                unreachable!("rejected in Experiment::new")
            }
        }
    }

    pub fn trial(&self, k: u64) -> ClickRecord {
        let n = self.channel_count();
        let mut scratch = vec![0.0; n];
        let mut clicks = vec![false; n];
        self.trial_into(k, &mut scratch, &mut clicks);
        ClickRecord {
            trial_index: k,
            clicks,
        }
    }

    /// All records, in trial order.
    pub fn records(&self, trials: u64) -> Vec<ClickRecord> {
        (0..trials).into_par_iter().map(|k| self.trial(k)).collect()
    }

    /// Streams records in trial order without materializing them.
    pub fn for_each_record(
        &self,
        trials: u64,
        mut f: impl FnMut(&ClickRecord) -> Result<()>,
    ) -> Result<()> {
        let n = self.channel_count();
        let mut scratch = vec![0.0; n];
        let mut rec = ClickRecord {
            trial_index: 0,
            clicks: vec![false; n],
        };
        for k in 0..trials {
            rec.trial_index = k;
            self.trial_into(k, &mut scratch, &mut rec.clicks);
            f(&rec)?;
        }
        Ok(())
    }

    /// Counts over all trials, accumulated in parallel chunks and merged.
    pub fn aggregate(&self, trials: u64) -> DetectionStats {
        const CHUNK: u64 = 1 << 14;
        let n = self.channel_count();
        let chunks = trials.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut st = DetectionStats::empty(n);
                let mut scratch = vec![0.0; n];
                let mut clicks = vec![false; n];
                for k in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    self.trial_into(k, &mut scratch, &mut clicks);
                    st.push_clicks(&clicks).expect("fixed channel count");
                }
                st
            })
            .reduce(
                || DetectionStats::empty(n),
                |mut a, b| {
                    a.merge(&b).expect("fixed channel count");
                    a
                },
            )
    }
}

/// Runs `trials` trials and returns every record; `trials` must be at least 1.
pub fn run_experiment(
    source: Source,
    detector: DetectorConfig,
    trials: u64,
    seed: u64,
) -> Result<Vec<ClickRecord>> {
    require_trials(trials)?;
    Ok(Experiment::new(source, detector, seed)?.records(trials))
}

/// Aggregation mode of [`run_experiment`]: counts only, for arbitrarily many trials.
pub fn run_aggregated(
    source: Source,
    detector: DetectorConfig,
    trials: u64,
    seed: u64,
) -> Result<DetectionStats> {
    require_trials(trials)?;
    Ok(Experiment::new(source, detector, seed)?.aggregate(trials))
}

fn require_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::config("trials", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// Writes records as CSV `trial,c1,c2,...` with 0/1 entries.
pub fn write_clicks_csv<W: Write + ?Sized>(
    out: &mut W,
    channels: usize,
    records: impl IntoIterator<Item = ClickRecord>,
) -> Result<()> {
    write_clicks_header(out, channels)?;
    for r in records {
        write_click_row(out, &r)?;
    }
    Ok(())
}

pub fn write_clicks_header<W: Write + ?Sized>(out: &mut W, channels: usize) -> Result<()> {
    let mut header = String::from("trial");
    for j in 1..=channels {
        header.push_str(&format!(",c{j}"));
    }
    writeln!(out, "{header}")?;
    Ok(())
}

pub fn write_click_row<W: Write + ?Sized>(out: &mut W, r: &ClickRecord) -> Result<()> {
    write!(out, "{}", r.trial_index)?;
    for &c in &r.clicks {
        write!(out, ",{}", u8::from(c))?;
    }
    writeln!(out)?;
    Ok(())
}

/// Born-rule sampling of joint `(A_i, B_j)` outcomes on `psi`, `trials` per setting.
/// Settings are ordered `(A1B1, A1B2, A2B1, A2B2)`.
pub fn sample_chsh_counts(
    scenario: &BellScenario<f64>,
    psi: &StateVector<f64>,
    trials: u64,
    seed: u64,
) -> Result<[SettingCounts; 4]> {
    let mut out = [SettingCounts::default(); 4];
    for (k, (i, j)) in [(1, 1), (1, 2), (2, 1), (2, 2)].into_iter().enumerate() {
        let p = joint_outcome_probabilities(scenario, psi, i, j)?;
        let total: f64 = p.iter().sum();
        let streams = TrialStreams::derived(seed, k as u64);
        out[k] = (0..trials)
            .into_par_iter()
            .fold(SettingCounts::default, |mut c, t| {
                let u = streams.trial(t).random::<f64>() * total;
                let (a, b) = if u < p[0] {
                    (1, 1)
                } else if u < p[0] + p[1] {
                    (1, -1)
                } else if u < p[0] + p[1] + p[2] {
                    (-1, 1)
                } else {
                    (-1, -1)
                };
                c.record(a, b);
                c
            })
            .reduce(SettingCounts::default, add_counts);
    }
    Ok(out)
}

/// Simulates an LHV model: each trial draws `λ` from the weights and records
/// `ξ_Ai(λ)·ξ_Bj(λ)` for the trial's setting.
pub fn sample_lhv_counts(model: &LhvModel<f64>, trials: u64, seed: u64) -> [SettingCounts; 4] {
    let cumulative: Vec<f64> = model
        .weights()
        .iter()
        .scan(0.0, |acc, w| {
            *acc += w;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().expect("non-empty model");
    let mut out = [SettingCounts::default(); 4];
    for (k, (i, j)) in [(0, 2), (0, 3), (1, 2), (1, 3)].into_iter().enumerate() {
        let streams = TrialStreams::derived(seed, 16 + k as u64);
        out[k] = (0..trials)
            .into_par_iter()
            .fold(SettingCounts::default, |mut c, t| {
                let u = streams.trial(t).random::<f64>() * total;
                let lambda = cumulative
                    .partition_point(|&x| x <= u)
                    .min(cumulative.len() - 1);
                let r = model.responses()[lambda];
                c.record(r[i], r[j]);
                c
            })
            .reduce(SettingCounts::default, add_counts);
    }
    out
}

fn add_counts(a: SettingCounts, b: SettingCounts) -> SettingCounts {
    SettingCounts {
        pp: a.pp + b.pp,
        pm: a.pm + b.pm,
        mp: a.mp + b.mp,
        mm: a.mm + b.mm,
        null: a.null + b.null,
    }
}
