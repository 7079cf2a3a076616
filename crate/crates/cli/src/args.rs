//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prevalence_core::gen::Preset;
use prevalence_core::{CurveFitter, Technique};

#[derive(Debug, Parser)]
#[command(
    name = "prevalence",
    version,
    about = "Calibrate a classifier on a labeled sample and estimate prevalence on new data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled synthetic dataset.
    Simulate(SimulateArgs),
    /// Draw a calibration sample, fit a curve and write the base joint distribution.
    Calibrate(CalibrateArgs),
    /// Estimate prevalence on a target dataset.
    Extrapolate(ExtrapolateArgs),
    /// Run the four-scenario simulation study and write its two tables.
    Experiment(ExperimentArgs),
    /// Estimate prevalence for every period of a series manifest.
    Series(SeriesArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GeneratorParams {
    /// Generator family when no preset is given.
    #[arg(long, value_enum)]
    pub generator: Option<GeneratorKind>,
    #[arg(long)]
    pub alpha_pos: Option<f64>,
    #[arg(long)]
    pub beta_pos: Option<f64>,
    #[arg(long)]
    pub alpha_neg: Option<f64>,
    #[arg(long)]
    pub beta_neg: Option<f64>,
    #[arg(long)]
    pub prev: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub w: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeneratorKind {
    Intrinsic,
    Extrinsic,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Named configuration, e.g. intrinsic-strong-base.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[command(flatten)]
    pub params: GeneratorParams,
    /// Number of items.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sampler {
    Uniform,
    Neyman,
    Random,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrateArgs {
    /// Scored base dataset.
    #[arg(long)]
    pub base: PathBuf,
    /// Pre-labeled calibration sample; when given, no sample is drawn.
    #[arg(long)]
    pub sample: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub sampler: Sampler,
    /// Number of equal-width score strata.
    #[arg(long, default_value_t = 10)]
    pub strata: usize,
    /// Items per stratum for the uniform sampler.
    #[arg(long, default_value_t = 200)]
    pub cap: usize,
    /// Sample size for the neyman and random samplers.
    #[arg(long, default_value_t = 2000)]
    pub total: usize,
    /// binned, platt, isotonic or temperature.
    #[arg(long, default_value = "platt")]
    pub fitter: CurveFitter,
    /// Density bins, also used by the binned fitter.
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long)]
    pub clip_epsilon: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Joint distribution JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the calibration sample; defaults next to `--out`.
    #[arg(long)]
    pub sample_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TechniqueFlags {
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    #[arg(long, default_value_t = 0.001)]
    pub grid_step: f64,
    /// Minimum tpr - fpr for acc and the median sweep.
    #[arg(long, default_value_t = 0.05)]
    pub guard: f64,
}

#[derive(Debug, Clone, Args)]
pub struct ExtrapolateArgs {
    #[arg(long)]
    pub joint: PathBuf,
    #[arg(long)]
    pub target: PathBuf,
    /// pcc, cpcc, cc, acc, mixture or median_sweep.
    #[arg(long, default_value = "cpcc")]
    pub technique: Technique,
    #[command(flatten)]
    pub flags: TechniqueFlags,
    /// Bootstrap replicates; 0 gives a point estimate from the stored curve.
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Items per generated dataset.
    #[arg(long, default_value_t = 20_000)]
    pub n: usize,
    #[arg(long, default_value = "isotonic")]
    pub fitter: CurveFitter,
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Comma-separated techniques; overrides the manifest's list.
    #[arg(long, value_delimiter = ',')]
    pub techniques: Vec<Technique>,
    #[command(flatten)]
    pub flags: TechniqueFlags,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Long-format CSV.
    #[arg(long)]
    pub out: PathBuf,
}
