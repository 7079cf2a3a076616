//! Percentile bootstrap over the whole calibrate-then-estimate pipeline.
//!
//! Each replicate obtains a calibration sample, refits the curve, rebuilds
//! the base joint distribution and re-runs the estimator. Target scores and
//! the base score density stay fixed. With real data there is a single
//! labeled sample, which is resampled with replacement inside every stratum
//! (keeping per-stratum counts). Simulated bases are labeled throughout, so
//! each replicate can instead draw a fresh stratified sample.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calib::{sample_uniform_strata, CurveFitter, StratifiedSample};
use crate::error::{Error, Result};
use crate::estim::TechniqueConfig;
use crate::gen::rng_from_seed;
use crate::histogram::{histogram_of, Histogram};
use crate::item::{labeled_points, ScoredItem};
use crate::joint::JointDistribution;

const MAX_RETRIES: u64 = 10;
const MAX_FAILURE_RATE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub technique: String,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl EstimateReport {
    pub fn width(&self) -> f64 {
        self.ci_high - self.ci_low
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }

    /// Mean of the replicate estimates with the middle-95% percentile
    /// interval. The interval is widened to include the mean if a very
    /// skewed replicate distribution leaves it outside.
    pub fn from_replicates(
        technique: impl Into<String>,
        estimates: &[f64],
        seed: u64,
    ) -> Result<Self> {
        if estimates.is_empty() {
            return Err(Error::EmptyInput("bootstrap replicates"));
        }
        let mut sorted = estimates.to_vec();
        sorted.sort_by(f64::total_cmp);
        let point = (sorted.iter().sum::<f64>() / sorted.len() as f64).clamp(0.0, 1.0);
        Ok(Self {
            technique: technique.into(),
            point,
            ci_low: percentile(&sorted, 0.025).clamp(0.0, 1.0).min(point),
            ci_high: percentile(&sorted, 0.975).clamp(0.0, 1.0).max(point),
            replicates: sorted.len(),
            seed,
        })
    }
}

/// Linearly interpolated quantile of sorted values (`q` in `[0, 1]`).
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Where each replicate's calibration sample comes from.
#[derive(Debug, Clone, Copy)]
pub enum CalibrationSource<'a> {
    /// Resample this labeled sample with replacement within its strata.
    Resample(&'a StratifiedSample),
    /// Draw a fresh sample of up to `cap` items from each of `strata`
    /// equal-width strata of a fully labeled base.
    Redraw {
        base: &'a [ScoredItem],
        cap: usize,
        strata: usize,
    },
}

enum Design<'a> {
    Strata(Vec<Vec<(f64, bool)>>),
    Redraw {
        base: &'a [ScoredItem],
        cap: usize,
        strata: usize,
    },
}

impl<'a> Design<'a> {
    fn new(source: CalibrationSource<'a>) -> Result<Self> {
        match source {
            CalibrationSource::Resample(sample) => {
                if sample.is_empty() {
                    return Err(Error::EmptyInput("calibration sample"));
                }
                let mut strata = vec![Vec::new(); sample.strata_count()];
                for (item, &h) in sample.items.iter().zip(&sample.strata) {
                    let label = item.label.ok_or_else(|| unlabeled(item))?;
                    strata[h].push((item.score, label.is_positive()));
                }
                Ok(Design::Strata(strata))
            }
            CalibrationSource::Redraw { base, cap, strata } => {
                if let Some(item) = base.iter().find(|i| i.label.is_none()) {
                    return Err(unlabeled(item));
                }
                if cap == 0 {
                    return Err(Error::InvalidParameter(
                        "per-stratum cap must be positive".into(),
                    ));
                }
                Ok(Design::Redraw { base, cap, strata })
            }
        }
    }

    fn draw(&self, seed: u64) -> Result<Vec<(f64, bool)>> {
        match self {
            Design::Strata(strata) => {
                let mut rng = rng_from_seed(seed);
                let mut out = Vec::with_capacity(strata.iter().map(Vec::len).sum());
                for points in strata {
                    for _ in 0..points.len() {
                        out.push(points[rng.random_range(0..points.len())]);
                    }
                }
                Ok(out)
            }
            Design::Redraw { base, cap, strata } => {
                let sample = sample_uniform_strata(base, *cap, *strata, seed)?;
                Ok(labeled_points(&sample.items))
            }
        }
    }
}

fn unlabeled(item: &ScoredItem) -> Error {
    Error::InvalidParameter(format!("calibration item `{}` has no label", item.id))
}

/// The calibrate-then-estimate computation run by every replicate.
pub struct Pipeline<'a> {
    pub base_density: &'a Histogram,
    pub scores: &'a [f64],
    pub config: &'a TechniqueConfig,
    pub fitter: CurveFitter,
}

impl Pipeline<'_> {
    /// Fit on the given points and estimate once.
    pub fn run(&self, points: &[(f64, bool)]) -> Result<f64> {
        let curve = self.fitter.fit(points)?;
        let joint = JointDistribution::new(self.base_density.clone(), curve)?;
        self.config.estimate(self.scores, &joint)
    }
}

fn run_replicates(
    pipeline: &Pipeline<'_>,
    source: CalibrationSource<'_>,
    reps: usize,
    seed: u64,
    replicate_seed: impl Fn(usize, u64) -> u64 + Sync,
) -> Result<EstimateReport> {
    if reps < 2 {
        return Err(Error::InvalidParameter(
            "bootstrap needs at least 2 replicates".into(),
        ));
    }
    pipeline.config.validate()?;
    let design = Design::new(source)?;
    let outcomes: Vec<Option<f64>> = (0..reps)
        .into_par_iter()
        .map(|r| {
            (0..=MAX_RETRIES).find_map(|attempt| {
                let points = design.draw(replicate_seed(r, attempt)).ok()?;
                pipeline.run(&points).ok()
            })
        })
        .collect();
    let estimates: Vec<f64> = outcomes.iter().flatten().copied().collect();
    let failures = reps - estimates.len();
    if failures as f64 > MAX_FAILURE_RATE * reps as f64 || estimates.is_empty() {
        return Err(Error::BootstrapUnstable { failures, reps });
    }
    EstimateReport::from_replicates(pipeline.config.technique.name(), &estimates, seed)
}

/// Bootstrap with a precomputed base density; `scores` are the scores the
/// estimator runs on (the target, or the base itself).
pub fn bootstrap_with_density(
    base_density: &Histogram,
    source: CalibrationSource<'_>,
    scores: &[f64],
    config: &TechniqueConfig,
    fitter: CurveFitter,
    reps: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let pipeline = Pipeline {
        base_density,
        scores,
        config,
        fitter,
    };
    let stride = reps as u64 * 10;
    run_replicates(&pipeline, source, reps, seed, move |r, attempt| {
        seed.wrapping_add(r as u64).wrapping_add(attempt * stride)
    })
}

/// Bootstrap report for the configured technique on the target scores, or on
/// the base scores when no target is given.
pub fn bootstrap_estimate(
    base_scores: &[f64],
    sample: &StratifiedSample,
    target_scores: Option<&[f64]>,
    config: &TechniqueConfig,
    fitter: CurveFitter,
    reps: usize,
    seed: u64,
) -> Result<EstimateReport> {
    config.validate()?;
    let density = histogram_of(base_scores, config.bins)?;
    let scores = target_scores.unwrap_or(base_scores);
    bootstrap_with_density(
        &density,
        CalibrationSource::Resample(sample),
        scores,
        config,
        fitter,
        reps,
        seed,
    )
}
