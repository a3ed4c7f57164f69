use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use coherence_lab::experiment::{
    self, ExperimentConfig, ExperimentKind, OutputFormat, Overrides, ScenarioPreset, SourceSpec,
};
use coherence_lab::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "coherence-lab",
    version,
    about = "Classical vs quantum entanglement experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one named experiment.
    Run(RunArgs),
    /// List the available experiments.
    List,
}

#[derive(clap::Args)]
struct RunArgs {
    /// grangier, chsh-operator, chsh-counts, threshold or lhv.
    experiment: String,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Trials (per setting for chsh-counts).
    #[arg(long)]
    trials: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write per-trial clicks next to the output file.
    #[arg(long)]
    raw_clicks: bool,
    /// Omit the timestamp field from JSON output.
    #[arg(long)]
    no_timestamp: bool,
    /// Source shorthand: single-photon, deterministic, thermal, thermal-independent, anti-correlated.
    #[arg(long)]
    source: Option<String>,
    /// Scenario preset: optimal, compatible, doubly-incompatible-nonoptimal.
    #[arg(long)]
    scenario: Option<String>,
    /// Number of random LHV mixtures.
    #[arg(long)]
    models: Option<u64>,
    /// Detection threshold for the threshold experiment.
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", experiment::list_experiments());
            ExitCode::SUCCESS
        }
        Command::Run(args) => match run(args) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(if e.is_numerical() {
                    EXIT_NUMERICAL
                } else {
                    EXIT_CONFIG
                })
            }
        },
    }
}

fn run(args: RunArgs) -> Result<(), Error> {
    let kind = ExperimentKind::parse(&args.experiment).ok_or_else(|| {
        config_error(
            "experiment",
            format!("unknown experiment `{}`", args.experiment),
        )
    })?;
    let source = args
        .source
        .as_deref()
        .map(|s| {
            SourceSpec::from_name(s)
                .ok_or_else(|| config_error("--source", format!("unknown source `{s}`")))
        })
        .transpose()?;
    let scenario = args
        .scenario
        .as_deref()
        .map(|s| {
            ScenarioPreset::from_name(s)
                .ok_or_else(|| config_error("--scenario", format!("unknown scenario `{s}`")))
        })
        .transpose()?;
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(Overrides {
        experiment: Some(kind),
        seed: args.seed,
        trials: args.trials,
        out: args.out,
        format: args.format.map(|f| match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }),
        raw_clicks: args.raw_clicks,
        no_timestamp: args.no_timestamp,
        source,
        scenario,
        models: args.models,
        threshold: args.threshold,
    })?;
    let cfg = cfg.resolve()?;
    if let Some(text) = experiment::run(&cfg)? {
        print!("{text}");
    }
    Ok(())
}

fn config_error(path: &str, message: String) -> Error {
    Error::Config {
        path: path.to_string(),
        location: String::new(),
        message,
    }
}
