//! The five workflow commands. Each returns a printable summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use prevalence_core::boot::bootstrap_with_density;
use prevalence_core::calib::{sample_neyman, sample_random, sample_uniform_strata};
use prevalence_core::gen::{ExtrinsicSpec, GeneratorSpec, IntrinsicSpec};
use prevalence_core::item::{labeled_points, scores_of};
use prevalence_core::{
    build_base_joint, CalibrationSource, CurveFitter, EstimateReport, StratifiedSample, Technique,
    TechniqueConfig,
};

use crate::args::{
    CalibrateArgs, ExperimentArgs, ExtrapolateArgs, GeneratorKind, GeneratorParams, Sampler,
    SeriesArgs, SimulateArgs, TechniqueFlags,
};
use crate::dataset::{read_dataset, write_dataset};
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::joint_file::{CalibrationRecord, JointFile};
use crate::manifest::SeriesManifest;

/// The given seed, or a fresh one from system entropy announced on stderr.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let seed = rand::random();
        eprintln!("seed: {seed}");
        seed
    })
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

fn generator_spec(args: &SimulateArgs) -> Result<GeneratorSpec> {
    let p: &GeneratorParams = &args.params;
    let any_param = p.generator.is_some()
        || [
            p.alpha_pos,
            p.beta_pos,
            p.alpha_neg,
            p.beta_neg,
            p.prev,
            p.w,
            p.b,
            p.alpha1,
            p.beta1,
            p.alpha2,
            p.beta2,
            p.lambda,
        ]
        .iter()
        .any(Option::is_some);
    if let Some(preset) = args.preset {
        if any_param {
            bail!("--preset conflicts with explicit generator parameters");
        }
        return Ok(preset.spec());
    }
    let need = |value: Option<f64>, flag: &str| value.ok_or_else(|| anyhow!("missing --{flag}"));
    let spec = match p.generator {
        None => bail!("give either --preset or --generator with its parameters"),
        Some(GeneratorKind::Intrinsic) => GeneratorSpec::Intrinsic(IntrinsicSpec {
            alpha_pos: need(p.alpha_pos, "alpha-pos")?,
            beta_pos: need(p.beta_pos, "beta-pos")?,
            alpha_neg: need(p.alpha_neg, "alpha-neg")?,
            beta_neg: need(p.beta_neg, "beta-neg")?,
            prev: need(p.prev, "prev")?,
        }),
        Some(GeneratorKind::Extrinsic) => GeneratorSpec::Extrinsic(ExtrinsicSpec {
            w: need(p.w, "w")?,
            b: need(p.b, "b")?,
            alpha1: need(p.alpha1, "alpha1")?,
            beta1: need(p.beta1, "beta1")?,
            alpha2: need(p.alpha2, "alpha2")?,
            beta2: need(p.beta2, "beta2")?,
            lambda: need(p.lambda, "lambda")?,
        }),
    };
    Ok(spec)
}

pub fn simulate(args: &SimulateArgs) -> Result<String> {
    let spec = generator_spec(args)?;
    let seed = resolve_seed(args.seed);
    let items = spec.generate(args.n as usize, seed)?;
    write_dataset(&args.out, &items)?;
    let positives = items
        .iter()
        .filter(|i| i.label.is_some_and(|l| l.is_positive()))
        .count();
    Ok(format!(
        "n={} positive_fraction={:.4} seed={seed}",
        items.len(),
        positives as f64 / items.len() as f64
    ))
}

fn default_sample_path(out: &Path) -> PathBuf {
    out.with_extension("sample.csv")
}

fn fitter_with(fitter: CurveFitter, bins: usize, clip_epsilon: Option<f64>) -> CurveFitter {
    match fitter {
        CurveFitter::Binned { .. } => CurveFitter::Binned { bins },
        CurveFitter::Temperature {
            clip_epsilon: default,
        } => CurveFitter::Temperature {
            clip_epsilon: clip_epsilon.unwrap_or(default),
        },
        other => other,
    }
}

pub fn calibrate(args: &CalibrateArgs) -> Result<String> {
    let seed = resolve_seed(args.seed);
    let base = read_dataset(&args.base)?;
    let base_scores = scores_of(&base);
    let sample: StratifiedSample = match &args.sample {
        Some(path) => StratifiedSample::from_parts(read_dataset(path)?, &base_scores, args.strata)?,
        None => match args.sampler {
            Sampler::Uniform => sample_uniform_strata(&base, args.cap, args.strata, seed)?,
            Sampler::Neyman => sample_neyman(&base, args.total, args.strata, seed)?,
            Sampler::Random => sample_random(&base, args.total, seed)?,
        },
    };
    if let Some(item) = sample.items.iter().find(|i| i.label.is_none()) {
        bail!("calibration item `{}` has no label", item.id);
    }
    let fitter = fitter_with(args.fitter, args.bins, args.clip_epsilon);
    let curve = fitter
        .fit(&labeled_points(&sample.items))
        .context("fitting calibration curve")?;
    let joint = build_base_joint(&base_scores, curve, args.bins)?;
    let prevalence = joint.prevalence();

    let file = JointFile {
        joint,
        calibration: Some(CalibrationRecord::new(fitter, &sample)),
    };
    file.write(&args.out)?;
    let sample_out = args
        .sample_out
        .clone()
        .unwrap_or_else(|| default_sample_path(&args.out));
    write_dataset(&sample_out, &sample.items)?;

    let mut summary = format!(
        "sample: {} items, fitter {}\nbase prevalence: {}",
        sample.len(),
        fitter,
        pct(prevalence)
    );
    if args.reps >= 2 {
        let config = TechniqueConfig {
            bins: args.bins,
            ..TechniqueConfig::new(Technique::Cpcc)
        };
        let report = bootstrap_with_density(
            &file.joint.density,
            CalibrationSource::Resample(&sample),
            &base_scores,
            &config,
            fitter,
            args.reps,
            seed,
        )?;
        write!(
            summary,
            "\nbootstrap ({} reps): {} CI ({}, {})",
            report.replicates,
            pct(report.point),
            pct(report.ci_low),
            pct(report.ci_high)
        )?;
    }
    Ok(summary)
}

fn technique_config(technique: Technique, flags: &TechniqueFlags, bins: usize) -> TechniqueConfig {
    TechniqueConfig {
        technique,
        threshold: flags.threshold,
        grid_step: flags.grid_step,
        bins,
        denominator_guard: flags.guard,
    }
}

/// Bootstraps when the joint file carries its calibration sample and
/// `reps >= 2`; otherwise reports the point estimate from the stored curve.
fn estimate_with(
    joint_file: &JointFile,
    scores: &[f64],
    config: &TechniqueConfig,
    reps: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let density = &joint_file.joint.density;
    match &joint_file.calibration {
        Some(record) if reps >= 2 => {
            let sample = record.stratified_sample();
            let fitter = record.fitter(density.bins())?;
            Ok(bootstrap_with_density(
                density,
                CalibrationSource::Resample(&sample),
                scores,
                config,
                fitter,
                reps,
                seed,
            )?)
        }
        _ => {
            let point = config.estimate(scores, &joint_file.joint)?;
            Ok(EstimateReport {
                technique: config.technique.name().to_string(),
                point,
                ci_low: point,
                ci_high: point,
                replicates: 1,
                seed,
            })
        }
    }
}

fn report_line(label: &str, report: &EstimateReport) -> String {
    format!(
        "{label:<12} {:<13} {:>8} ({:>8}, {:>8})",
        report.technique,
        pct(report.point),
        pct(report.ci_low),
        pct(report.ci_high)
    )
}

pub fn extrapolate(args: &ExtrapolateArgs) -> Result<String> {
    let seed = resolve_seed(args.seed);
    let joint_file = JointFile::read(&args.joint)?;
    let target = read_dataset(&args.target)?;
    if target.is_empty() {
        bail!("target file {} has no rows", args.target.display());
    }
    let config = technique_config(args.technique, &args.flags, joint_file.joint.density.bins());
    if joint_file.calibration.is_none() && args.reps >= 2 {
        eprintln!("joint file has no calibration sample; reporting a point estimate");
    }
    let report = estimate_with(&joint_file, &scores_of(&target), &config, args.reps, seed)?;
    fs::write(&args.out, serde_json::to_string_pretty(&report)? + "\n")
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    Ok(report_line("target", &report))
}

/// Summary text and whether every correct-assumption check passed.
pub fn experiment(args: &ExperimentArgs) -> Result<(String, bool)> {
    let seed = resolve_seed(args.seed);
    let config = ExperimentConfig {
        n: args.n,
        fitter: args.fitter,
        ..ExperimentConfig::new(args.reps, seed)
    };
    let result = run_experiment(&config)?;
    result.write_tables(&args.out_dir)?;
    let mut summary = format!(
        "seed {seed}, {} replicates, fitter {}\n",
        args.reps, args.fitter
    );
    let mut ok = true;
    for check in result.checks() {
        let verdict = if check.passed { "PASS" } else { "FAIL" };
        let kind = if check.correct_assumption {
            ""
        } else {
            " (informational)"
        };
        writeln!(
            summary,
            "[{}] {verdict} criterion {}: {}{kind}",
            check.criterion, check.criterion, check.description
        )?;
        ok &= check.passed || !check.correct_assumption;
    }
    Ok((summary, ok))
}

pub fn series(args: &SeriesArgs) -> Result<String> {
    let seed = resolve_seed(args.seed);
    let manifest = SeriesManifest::read(&args.manifest)?;
    let techniques = if args.techniques.is_empty() {
        manifest.techniques.clone()
    } else {
        args.techniques.clone()
    };
    if techniques.is_empty() {
        bail!("no techniques given on the command line or in the manifest");
    }
    let joint_file = JointFile::read(&manifest.base)?;
    let bins = joint_file.joint.density.bins();

    let mut csv = String::from("period,technique,point,ci_low,ci_high\n");
    let mut summary = String::new();
    for period in &manifest.periods {
        let target =
            read_dataset(&period.target).with_context(|| format!("period `{}`", period.label))?;
        if target.is_empty() {
            bail!("period `{}`: target file has no rows", period.label);
        }
        let scores = scores_of(&target);
        for &technique in &techniques {
            let config = technique_config(technique, &args.flags, bins);
            let report = estimate_with(&joint_file, &scores, &config, args.reps, seed)
                .with_context(|| format!("period `{}`, {}", period.label, technique.name()))?;
            writeln!(
                csv,
                "{},{},{:.6},{:.6},{:.6}",
                period.label, report.technique, report.point, report.ci_low, report.ci_high
            )?;
            writeln!(summary, "{}", report_line(&period.label, &report))?;
        }
    }
    fs::write(&args.out, csv).with_context(|| format!("cannot write {}", args.out.display()))?;
    Ok(summary.trim_end().to_string())
}
