//! Named experiments, their JSON configuration and their output artifacts.
//!
//! A run is described by one [`ExperimentConfig`] document. Command-line flags
//! are applied on top of the file through [`Overrides`], after which
//! [`ExperimentConfig::resolve`] fills defaults and validates. The resolved
//! config is embedded verbatim in every JSON output.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bell::{
    self, deterministic_strategies, lhv_chsh, presets, ChshReport, LhvModel, Response,
};
use crate::detection::{
    self, DetectorConfig, Experiment, PoissonDetector, Source, ThresholdDetector,
};
use crate::error::{Error, Result};
use crate::fields::ClassicalFieldModel;
use crate::hilbert::{BellScenario, StateVector};
use crate::rng::TrialStreams;
use crate::scalar::C;
use crate::stats::{
    chsh_from_counts, grangier_test, ChshEstimate, DetectionSummary, SettingCounts,
};

pub const DEFAULT_PHOTODETECTION_TRIALS: u64 = 1_000_000;
pub const DEFAULT_TRIALS_PER_SETTING: u64 = 100_000;
pub const DEFAULT_LHV_MIXTURES: u64 = 100_000;
pub const DEFAULT_CONFIDENCE_SIGMA: f64 = 3.0;
/// Largest number of deterministic strategies in one random LHV mixture.
const MAX_MIXTURE_SUPPORT: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Grangier,
    ChshOperator,
    ChshCounts,
    Threshold,
    Lhv,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Grangier,
        ExperimentKind::ChshOperator,
        ExperimentKind::ChshCounts,
        ExperimentKind::Threshold,
        ExperimentKind::Lhv,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Grangier => "grangier",
            ExperimentKind::ChshOperator => "chsh-operator",
            ExperimentKind::ChshCounts => "chsh-counts",
            ExperimentKind::Threshold => "threshold",
            ExperimentKind::Lhv => "lhv",
        }
    }

    fn topic(self) -> &'static str {
        match self {
            ExperimentKind::Grangier => {
                "beam-splitter anticorrelation, single photon vs classical fields"
            }
            ExperimentKind::ChshOperator => {
                "Bell operator norm, Landau identity, commutator criterion"
            }
            ExperimentKind::ChshCounts => "CHSH estimated from Born-sampled outcome counts",
            ExperimentKind::Threshold => {
                "threshold detection of an anti-correlated classical field"
            }
            ExperimentKind::Lhv => "local hidden-variable ceiling by exhaustive enumeration",
        }
    }

    fn uses_seed(self) -> bool {
        self != ExperimentKind::ChshOperator
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One catalog line per experiment.
pub fn list_experiments() -> String {
    ExperimentKind::ALL
        .iter()
        .map(|k| format!("{} ({})\n", k.name(), k.topic()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Destination file; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Also write per-trial clicks as `<path stem>.clicks.csv`.
    #[serde(default)]
    pub raw_clicks: bool,
    /// Include a wall-clock `timestamp` field in JSON output.
    #[serde(default = "yes")]
    pub timestamp: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            path: None,
            format: OutputFormat::Json,
            raw_clicks: false,
            timestamp: true,
        }
    }
}

/// Light source of a photodetection experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSpec {
    /// One photon in the balanced two-channel superposition.
    SinglePhoton,
    /// Single excitation with the given channel amplitudes (normalized on use).
    State { amplitudes: Vec<C<f64>> },
    /// Classical stochastic field.
    Field { model: ClassicalFieldModel },
    /// Classical field replayed from a `trial,i1,i2` CSV table.
    IntensityTable { path: PathBuf },
}

impl SourceSpec {
    /// Shorthand names accepted on the command line.
    pub fn from_name(name: &str) -> Option<Self> {
        let field = |model| Some(SourceSpec::Field { model });
        match name {
            "single-photon" => Some(SourceSpec::SinglePhoton),
            "deterministic" => field(ClassicalFieldModel::Deterministic {
                intensities: vec![1.0, 1.0],
            }),
            "thermal" => field(ClassicalFieldModel::Thermal {
                means: vec![1.0, 1.0],
                correlated: true,
            }),
            "thermal-independent" => field(ClassicalFieldModel::Thermal {
                means: vec![1.0, 1.0],
                correlated: false,
            }),
            "anti-correlated" => field(ClassicalFieldModel::anti_correlated(1.0, 0.01)),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SourceSpec::SinglePhoton => "single-photon",
            SourceSpec::State { .. } => "state",
            SourceSpec::Field { model } => model.kind_name(),
            SourceSpec::IntensityTable { .. } => "custom",
        }
    }

    fn is_quantum(&self) -> bool {
        matches!(self, SourceSpec::SinglePhoton | SourceSpec::State { .. })
    }

    fn build(&self) -> Result<Source> {
        match self {
            SourceSpec::SinglePhoton => Ok(Source::Quantum(StateVector::balanced_pair())),
            SourceSpec::State { amplitudes } => {
                Ok(Source::Quantum(StateVector::normalize(amplitudes)?))
            }
            SourceSpec::Field { model } => {
                model.validate()?;
                Ok(Source::Classical(model.clone()))
            }
            SourceSpec::IntensityTable { path } => {
                let file = File::open(path).map_err(|e| {
                    Error::config("source.path", format!("{}: {e}", path.display()))
                })?;
                Ok(Source::Classical(ClassicalFieldModel::custom_from_csv(
                    file,
                )?))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioPreset {
    Optimal,
    Compatible,
    DoublyIncompatibleNonoptimal,
}

impl ScenarioPreset {
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "optimal" => Some(ScenarioPreset::Optimal),
            "compatible" => Some(ScenarioPreset::Compatible),
            "doubly-incompatible-nonoptimal" => Some(ScenarioPreset::DoublyIncompatibleNonoptimal),
            _ => None,
        }
    }

    pub fn scenario(self) -> BellScenario<f64> {
        match self {
            ScenarioPreset::Optimal => presets::optimal(),
            ScenarioPreset::Compatible => presets::compatible(),
            ScenarioPreset::DoublyIncompatibleNonoptimal => {
                presets::doubly_incompatible_nonoptimal()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioSpec {
    Preset {
        name: ScenarioPreset,
    },
    /// Four operators given as row-major `[re, im]` matrices.
    Explicit(BellScenario<f64>),
}

impl ScenarioSpec {
    fn build(&self) -> Result<BellScenario<f64>> {
        match self {
            ScenarioSpec::Preset { name } => Ok(name.scenario()),
            ScenarioSpec::Explicit(s) => {
                s.validate()
                    .map_err(|e| Error::config("scenario", e.to_string()))?;
                Ok(s.clone())
            }
        }
    }
}

/// Full description of one run. Optional fields are filled by [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Trials per run; per setting for `chsh-counts`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    /// State for the CHSH experiments; the singlet by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<C<f64>>>,
    /// Number of random LHV mixtures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<u64>,
    /// Significance multiplier for the classical-compatibility verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence_sigma: Option<f64>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub raw_clicks: bool,
    pub no_timestamp: bool,
    pub source: Option<SourceSpec>,
    pub scenario: Option<ScenarioPreset>,
    pub models: Option<u64>,
    pub threshold: Option<f64>,
}

impl ExperimentConfig {
    /// Parses a JSON config, reporting failures with field path, line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let (line, column) = (inner.line(), inner.column());
            let message = strip_location(&inner.to_string());
            Error::Config {
                path,
                location: format!(" (line {line}, column {column})"),
                message,
            }
        })?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: Overrides) -> Result<()> {
        if let Some(k) = o.experiment {
            match self.experiment {
                Some(existing) if existing != k => {
                    return Err(Error::config(
                        "experiment",
                        format!("config file describes `{existing}` but `{k}` was requested"),
                    ))
                }
                _ => self.experiment = Some(k),
            }
        }
        macro_rules! take {
            ($($field:ident),*) => { $( if o.$field.is_some() { self.$field = o.$field; } )* };
        }
        take!(seed, trials, source, models);
        if let Some(p) = o.scenario {
            self.scenario = Some(ScenarioSpec::Preset { name: p });
        }
        if let Some(theta) = o.threshold {
            self.detector = Some(DetectorConfig::Threshold(ThresholdDetector {
                threshold: theta,
            }));
        }
        if o.out.is_some() {
            self.output.path = o.out;
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        self.output.raw_clicks |= o.raw_clicks;
        if o.no_timestamp {
            self.output.timestamp = false;
        }
        Ok(())
    }

    /// Fills defaults and validates; the result is what runs and what gets embedded in output.
    pub fn resolve(mut self) -> Result<Self> {
        let kind = self
            .experiment
            .ok_or_else(|| Error::config("experiment", "missing experiment name"))?;
        if kind.uses_seed() && self.seed.is_none() {
            return Err(Error::config("seed", "a seed is required (e.g. --seed 1)"));
        }
        if self.trials == Some(0) {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.models == Some(0) {
            return Err(Error::config("models", "must be at least 1"));
        }
        if let Some(sigma) = self.confidence_sigma {
            if !(sigma.is_finite() && sigma >= 0.0) {
                return Err(Error::config(
                    "confidence_sigma",
                    "must be a non-negative number",
                ));
            }
        }
        if self.output.raw_clicks
            && !matches!(kind, ExperimentKind::Grangier | ExperimentKind::Threshold)
        {
            return Err(Error::config(
                "output.raw_clicks",
                format!("`{kind}` produces no click records"),
            ));
        }
        if self.output.raw_clicks && self.output.path.is_none() {
            return Err(Error::config(
                "output.raw_clicks",
                "raw clicks need an output path (--out)",
            ));
        }
        match kind {
            ExperimentKind::Grangier | ExperimentKind::Threshold => {
                self.trials.get_or_insert(DEFAULT_PHOTODETECTION_TRIALS);
                self.confidence_sigma
                    .get_or_insert(DEFAULT_CONFIDENCE_SIGMA);
                let source = self.source.get_or_insert_with(|| match kind {
                    ExperimentKind::Grangier => SourceSpec::SinglePhoton,
                    _ => SourceSpec::Field {
                        model: ClassicalFieldModel::anti_correlated(1.0, 0.01),
                    },
                });
                if self.detector.is_none() {
                    self.detector = Some(default_detector(kind, source)?);
                }
                self.reject_fields(
                    kind,
                    &[
                        ("scenario", self.scenario.is_some()),
                        ("state", self.state.is_some()),
                        ("models", self.models.is_some()),
                    ],
                )?;
            }
            ExperimentKind::ChshOperator | ExperimentKind::ChshCounts => {
                self.scenario.get_or_insert(ScenarioSpec::Preset {
                    name: ScenarioPreset::Optimal,
                });
                if kind == ExperimentKind::ChshCounts {
                    self.trials.get_or_insert(DEFAULT_TRIALS_PER_SETTING);
                    self.state
                        .get_or_insert_with(|| StateVector::<f64>::singlet().amplitudes().to_vec());
                }
                self.reject_fields(
                    kind,
                    &[
                        ("source", self.source.is_some()),
                        ("detector", self.detector.is_some()),
                        ("models", self.models.is_some()),
                    ],
                )?;
                if kind == ExperimentKind::ChshOperator {
                    self.reject_fields(kind, &[("trials", self.trials.is_some())])?;
                }
            }
            ExperimentKind::Lhv => {
                self.models.get_or_insert(DEFAULT_LHV_MIXTURES);
                self.reject_fields(
                    kind,
                    &[
                        ("source", self.source.is_some()),
                        ("detector", self.detector.is_some()),
                        ("scenario", self.scenario.is_some()),
                        ("state", self.state.is_some()),
                        ("trials", self.trials.is_some()),
                    ],
                )?;
            }
        }
        if let Some(d) = &self.detector {
            d.validate()
                .map_err(|e| Error::config("detector", e.to_string()))?;
        }
        if let Some(SourceSpec::Field { model }) = &self.source {
            model
                .validate()
                .map_err(|e| Error::config("source.model", e.to_string()))?;
        }
        Ok(self)
    }

    fn reject_fields(&self, kind: ExperimentKind, present: &[(&str, bool)]) -> Result<()> {
        match present.iter().find(|(_, p)| *p) {
            Some((name, _)) => Err(Error::config(*name, format!("not used by `{kind}`"))),
            None => Ok(()),
        }
    }

    fn kind(&self) -> ExperimentKind {
        self.experiment.expect("resolved config")
    }
}

fn default_detector(kind: ExperimentKind, source: &SourceSpec) -> Result<DetectorConfig> {
    if kind == ExperimentKind::Threshold {
        let total = match source {
            SourceSpec::Field { model } => model.total_intensity(),
            SourceSpec::IntensityTable { .. } => {
                return Err(Error::config(
                    "detector",
                    "threshold must be given for an intensity table",
                ))
            }
            _ => {
                return Err(Error::config(
                    "source",
                    "threshold detection needs a classical field source",
                ))
            }
        };
        return Ok(DetectorConfig::Threshold(ThresholdDetector {
            threshold: total / 2.0,
        }));
    }
    Ok(if source.is_quantum() {
        DetectorConfig::QuantumBorn
    } else {
        DetectorConfig::SemiclassicalPoisson(PoissonDetector::new(1.0, 0.1))
    })
}

fn strip_location(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// Photodetection outcome with the semiclassical compatibility verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub model: String,
    pub detector: String,
    #[serde(flatten)]
    pub summary: DetectionSummary,
    /// `pc/(p1·p2)`; absent when a channel never clicked.
    pub alpha: Option<f64>,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    #[serde(flatten)]
    pub report: ChshReport<f64>,
    pub is_dichotomous: bool,
    /// `⟨ψ|𝓑|ψ⟩` when a state is configured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chsh_on_state: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsResult {
    pub trials_per_setting: u64,
    pub settings: [SettingCounts; 4],
    #[serde(flatten)]
    pub estimate: ChshEstimate,
    /// `⟨ψ|𝓑|ψ⟩` computed exactly, for comparison.
    pub exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvResult {
    pub deterministic_strategies: u64,
    pub random_mixtures: u64,
    pub max_s_deterministic: String,
    pub max_s_mixtures: String,
    /// Overall maximum as an exact fraction and as a float.
    pub max_s: String,
    pub max_s_value: f64,
    pub best_strategy: Response,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExperimentResult {
    Detection(DetectionResult),
    Operator(OperatorResult),
    Counts(CountsResult),
    Lhv(LhvResult),
}

#[derive(Serialize)]
struct Document<'a> {
    experiment: ExperimentKind,
    config: &'a ExperimentConfig,
    result: &'a ExperimentResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

/// Executes a resolved config without touching the filesystem (except an intensity table).
pub fn execute(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    match cfg.kind() {
        ExperimentKind::Grangier | ExperimentKind::Threshold => {
            let (source, experiment) = photodetection(cfg)?;
            let stats = experiment.aggregate(cfg.trials.expect("resolved"));
            let summary = stats.summary();
            let (alpha, verdict) =
                match grangier_test(&stats, cfg.confidence_sigma.expect("resolved")) {
                    Ok(v) => (Some(v.alpha), v.label().to_string()),
                    Err(Error::UndefinedRatio) => (None, "undefined".to_string()),
                    Err(e) => return Err(e),
                };
            Ok(ExperimentResult::Detection(DetectionResult {
                model: source.label().to_string(),
                detector: cfg.detector.as_ref().expect("resolved").name().to_string(),
                summary,
                alpha,
                verdict,
            }))
        }
        ExperimentKind::ChshOperator => {
            let s = cfg.scenario.as_ref().expect("resolved").build()?;
            let report = bell::analyze(&s)?;
            let chsh_on_state = cfg
                .state
                .as_ref()
                .map(|amps| bell::chsh_value(&s, &StateVector::normalize(amps)?))
                .transpose()?;
            Ok(ExperimentResult::Operator(OperatorResult {
                report,
                is_dichotomous: s.is_dichotomous(),
                chsh_on_state,
            }))
        }
        ExperimentKind::ChshCounts => {
            let s = cfg.scenario.as_ref().expect("resolved").build()?;
            let psi = StateVector::normalize(cfg.state.as_ref().expect("resolved"))?;
            let trials = cfg.trials.expect("resolved");
            let settings =
                detection::sample_chsh_counts(&s, &psi, trials, cfg.seed.expect("resolved"))?;
            Ok(ExperimentResult::Counts(CountsResult {
                trials_per_setting: trials,
                settings,
                estimate: chsh_from_counts(&settings)?,
                exact: bell::chsh_value(&s, &psi)?,
            }))
        }
        ExperimentKind::Lhv => Ok(ExperimentResult::Lhv(lhv_sweep(
            cfg.models.expect("resolved"),
            cfg.seed.expect("resolved"),
        )?)),
    }
}

fn photodetection(cfg: &ExperimentConfig) -> Result<(&SourceSpec, Experiment)> {
    let spec = cfg.source.as_ref().expect("resolved");
    let detector = *cfg.detector.as_ref().expect("resolved");
    let source = spec.build()?;
    let experiment =
        Experiment::new(source, detector, cfg.seed.expect("resolved")).map_err(|e| match e {
            Error::IncompatibleSourceDetector { .. } => Error::config("detector", e.to_string()),
            other => other,
        })?;
    if experiment.channel_count() != 2 {
        return Err(Error::config(
            "source",
            format!(
                "coincidence statistics need 2 channels, source has {}",
                experiment.channel_count()
            ),
        ));
    }
    Ok((spec, experiment))
}

type Q = Ratio<i64>;

/// Exact maximum of the CHSH expression over all deterministic strategies and
/// `mixtures` random rational mixtures of them.
pub fn lhv_sweep(mixtures: u64, seed: u64) -> Result<LhvResult> {
    let strategies: Vec<Response> = deterministic_strategies().collect();
    let mut best_det = Q::from_integer(-1);
    let mut best_strategy = strategies[0];
    for r in &strategies {
        let s = lhv_chsh(&LhvModel::<Q>::deterministic(*r)?);
        if s > best_det {
            best_det = s;
            best_strategy = *r;
        }
    }
    let streams = TrialStreams::derived(seed, 0x1A7);
    let best_mix = (0..mixtures)
        .into_par_iter()
        .map(|k| {
            let mut rng = streams.trial(k);
            let support = rng.random_range(1..=MAX_MIXTURE_SUPPORT);
            let raw: Vec<i64> = (0..support).map(|_| rng.random_range(1..=1000)).collect();
            let total: i64 = raw.iter().sum();
            let weights = raw.iter().map(|&w| Q::new(w, total)).collect();
            let responses = (0..support)
                .map(|_| strategies[rng.random_range(0..strategies.len())])
                .collect();
            LhvModel::new(weights, responses).map(|m| lhv_chsh(&m))
        })
        .try_reduce(|| Q::from_integer(0), |a, b| Ok(a.max(b)))?;
    let max = best_det.max(best_mix);
    Ok(LhvResult {
        deterministic_strategies: strategies.len() as u64,
        random_mixtures: mixtures,
        max_s_deterministic: best_det.to_string(),
        max_s_mixtures: best_mix.to_string(),
        max_s: max.to_string(),
        max_s_value: *max.numer() as f64 / *max.denom() as f64,
        best_strategy,
    })
}

/// Renders the primary artifact. `timestamp` is only used for JSON.
pub fn render(
    cfg: &ExperimentConfig,
    result: &ExperimentResult,
    timestamp: Option<u64>,
) -> Result<String> {
    match cfg.output.format {
        OutputFormat::Json => {
            let doc = Document {
                experiment: cfg.kind(),
                config: cfg,
                result,
                timestamp,
            };
            let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => render_csv(result),
    }
}

fn render_csv(result: &ExperimentResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let io = |e: csv::Error| Error::Io(e.to_string());
    match result {
        ExperimentResult::Detection(d) => {
            w.write_record([
                "model", "N", "p1", "p2", "pc", "g2", "se_g2", "alpha", "verdict",
            ])
            .map_err(io)?;
            let s = &d.summary;
            w.write_record([
                d.model.clone(),
                s.trials.to_string(),
                s.p1.to_string(),
                s.p2.to_string(),
                s.pc.to_string(),
                opt(s.g2),
                opt(s.se_g2),
                opt(d.alpha),
                d.verdict.clone(),
            ])
            .map_err(io)?;
        }
        ExperimentResult::Operator(o) => {
            let r = &o.report;
            w.write_record([
                "bell_norm",
                "landau_residual",
                "commutator_a_norm",
                "commutator_b_norm",
                "permutation_max",
                "permutation",
                "classification",
            ])
            .map_err(io)?;
            w.write_record([
                r.bell_norm.to_string(),
                r.landau_residual.to_string(),
                r.commutator_a_norm.to_string(),
                r.commutator_b_norm.to_string(),
                r.permutation_max.to_string(),
                r.permutation.label().to_string(),
                format!("{:?}", r.classification),
            ])
            .map_err(io)?;
        }
        ExperimentResult::Counts(c) => {
            w.write_record([
                "trials_per_setting",
                "S",
                "se",
                "E11",
                "E12",
                "E21",
                "E22",
                "exact",
            ])
            .map_err(io)?;
            let e = c.estimate.correlators;
            w.write_record([
                c.trials_per_setting.to_string(),
                c.estimate.s.to_string(),
                c.estimate.se.to_string(),
                e[0].to_string(),
                e[1].to_string(),
                e[2].to_string(),
                e[3].to_string(),
                c.exact.to_string(),
            ])
            .map_err(io)?;
        }
        ExperimentResult::Lhv(l) => {
            w.write_record([
                "strategies",
                "mixtures",
                "max_s_deterministic",
                "max_s_mixtures",
                "max_s",
            ])
            .map_err(io)?;
            w.write_record([
                l.deterministic_strategies.to_string(),
                l.random_mixtures.to_string(),
                l.max_s_deterministic.clone(),
                l.max_s_mixtures.clone(),
                l.max_s.clone(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Sibling path for raw click records: `run.json` → `run.clicks.csv`.
pub fn clicks_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.clicks.csv"))
}

/// Writes `path` by filling a temporary sibling and renaming it into place.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        fill(&mut w)?;
        w.into_inner()
            .map_err(|e| Error::Io(e.to_string()))?
            .sync_all()?;
        fs::rename(&tmp, path)?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Runs a resolved config and writes its artifacts; returns the primary output
/// when no output path is configured.
pub fn run(cfg: &ExperimentConfig) -> Result<Option<String>> {
    let result = execute(cfg)?;
    let timestamp = cfg.output.timestamp.then(unix_seconds);
    let text = render(cfg, &result, timestamp)?;
    let Some(out) = &cfg.output.path else {
        return Ok(Some(text));
    };
    if cfg.output.raw_clicks {
        let (_, experiment) = photodetection(cfg)?;
        write_atomic(&clicks_path(out), |w| {
            detection::write_clicks_header(w, experiment.channel_count())?;
            experiment.for_each_record(cfg.trials.expect("resolved"), |r| {
                detection::write_click_row(w, r)
            })
        })?;
    }
    write_atomic(out, |w| Ok(w.write_all(text.as_bytes())?))?;
    Ok(None)
}

fn unix_seconds() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolved(kind: ExperimentKind, o: Overrides) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(Overrides {
            experiment: Some(kind),
            no_timestamp: true,
            ..o
        })
        .unwrap();
        cfg.resolve().unwrap()
    }

    #[test]
    fn catalog_has_one_line_per_experiment() {
        let text = list_experiments();
        assert_eq!(text.lines().count(), 5);
        for k in ExperimentKind::ALL {
            assert!(text
                .lines()
                .any(|l| l.starts_with(&format!("{} (", k.name()))));
        }
    }

    #[test]
    fn single_photon_grangier_is_nonclassical() {
        let cfg = resolved(
            ExperimentKind::Grangier,
            Overrides {
                seed: Some(7),
                trials: Some(100_000),
                ..Default::default()
            },
        );
        let ExperimentResult::Detection(d) = execute(&cfg).unwrap() else {
            panic!()
        };
        assert_eq!(d.summary.coincidences, 0);
        assert_eq!(d.summary.pc, 0.0);
        assert_eq!(d.verdict, "nonclassical");
    }

    #[test]
    fn operator_preset_matches_closed_form() {
        let cfg = resolved(
            ExperimentKind::ChshOperator,
            Overrides {
                scenario: Some(ScenarioPreset::Optimal),
                ..Default::default()
            },
        );
        let ExperimentResult::Operator(o) = execute(&cfg).unwrap() else {
            panic!()
        };
        assert!((o.report.bell_norm - 2f64.sqrt()).abs() < 1e-9);
        assert!(o.report.landau_residual < 1e-10);
    }

    #[test]
    fn lhv_sweep_caps_at_one() {
        let r = lhv_sweep(2_000, 1).unwrap();
        assert_eq!(r.max_s, "1");
        assert_eq!(r.deterministic_strategies, 81);
    }

    #[test]
    fn missing_seed_and_zero_trials_are_config_errors() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(Overrides {
            experiment: Some(ExperimentKind::Grangier),
            ..Default::default()
        })
        .unwrap();
        assert!(
            matches!(cfg.clone().resolve(), Err(Error::Config { ref path, .. }) if path == "seed")
        );
        cfg.seed = Some(1);
        cfg.trials = Some(0);
        assert!(matches!(cfg.resolve(), Err(Error::Config { ref path, .. }) if path == "trials"));
    }

    #[test]
    fn parse_errors_carry_path_and_line() {
        let text = "{\n  \"experiment\": \"grangier\",\n  \"trials\": \"many\"\n}";
        match ExperimentConfig::from_json(text) {
            Err(Error::Config { path, location, .. }) => {
                assert_eq!(path, "trials");
                assert!(location.contains("line 3"), "{location}");
            }
            other => panic!("{other:?}"),
        }
        // tagged sections are buffered, so the location points past the section
        let nested = "{\"detector\": {\"kind\": \"threshold\", \"threshold\": \"x\"}}";
        match ExperimentConfig::from_json(nested) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "detector"),
            other => panic!("{other:?}"),
        }
        let unknown = "{\"experiment\": \"lhv\", \"sed\": 1}";
        assert!(matches!(
            ExperimentConfig::from_json(unknown),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn flags_override_file_fields() {
        let mut cfg =
            ExperimentConfig::from_json(r#"{"experiment":"grangier","seed":1,"trials":10}"#)
                .unwrap();
        cfg.apply(Overrides {
            seed: Some(9),
            trials: Some(20),
            ..Default::default()
        })
        .unwrap();
        assert_eq!((cfg.seed, cfg.trials), (Some(9), Some(20)));
        let clash = cfg.apply(Overrides {
            experiment: Some(ExperimentKind::Lhv),
            ..Default::default()
        });
        assert!(matches!(clash, Err(Error::Config { .. })));
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = resolved(
            ExperimentKind::Threshold,
            Overrides {
                seed: Some(3),
                trials: Some(10),
                ..Default::default()
            },
        );
        assert_eq!(
            cfg.detector,
            Some(DetectorConfig::Threshold(ThresholdDetector {
                threshold: 0.5
            }))
        );
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg);
    }

    #[test]
    fn csv_summary_row() {
        let cfg = resolved(
            ExperimentKind::Grangier,
            Overrides {
                seed: Some(1),
                trials: Some(1000),
                format: Some(OutputFormat::Csv),
                ..Default::default()
            },
        );
        let text = render(&cfg, &execute(&cfg).unwrap(), None).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("model,N,p1,p2,pc,g2,se_g2,alpha,verdict")
        );
        assert!(lines.next().unwrap().starts_with("single-photon,1000,"));
    }

    #[test]
    fn clicks_path_is_a_sibling() {
        assert_eq!(
            clicks_path(Path::new("/tmp/x/run.json")),
            PathBuf::from("/tmp/x/run.clicks.csv")
        );
    }
}
