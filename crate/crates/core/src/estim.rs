//! Prevalence estimators.
//!
//! `pcc`, `cpcc`, `cc` and `acc` work on raw scores. `mixture` and
//! `median_sweep` compare a target score histogram with the base
//! class-conditional densities, which is valid when those densities are
//! stable between base and target; `cpcc` with a borrowed curve is valid when
//! the calibration curve is stable instead.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curve::CalibrationCurve;
use crate::error::{Error, Result};
use crate::histogram::{hellinger_unchecked, histogram_with_edges, Histogram};
use crate::item::check_score;
use crate::joint::{ClassConditionals, JointDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technique {
    Pcc,
    Cpcc,
    Cc,
    Acc,
    Mixture,
    MedianSweep,
}

impl Technique {
    pub const ALL: [Technique; 6] = [
        Technique::Pcc,
        Technique::Cpcc,
        Technique::Cc,
        Technique::Acc,
        Technique::Mixture,
        Technique::MedianSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::Pcc => "pcc",
            Technique::Cpcc => "cpcc",
            Technique::Cc => "cc",
            Technique::Acc => "acc",
            Technique::Mixture => "mixture",
            Technique::MedianSweep => "median_sweep",
        }
    }

    /// Whether the estimate depends on the calibration sample.
    pub fn uses_calibration(self) -> bool {
        !matches!(self, Technique::Pcc | Technique::Cc)
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Technique::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "technique",
                name: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TechniqueConfig {
    pub technique: Technique,
    /// Decision threshold for `cc` and `acc`.
    pub threshold: f64,
    /// Prevalence grid spacing for `mixture`.
    pub grid_step: f64,
    pub bins: usize,
    /// Minimum `|tpr − fpr|` for `acc` and `median_sweep` thresholds.
    pub denominator_guard: f64,
}

impl TechniqueConfig {
    pub const DEFAULT_THRESHOLD: f64 = 0.5;
    pub const DEFAULT_GRID_STEP: f64 = 0.001;
    pub const DEFAULT_BINS: usize = 20;
    pub const DEFAULT_GUARD: f64 = 0.05;

    pub fn new(technique: Technique) -> Self {
        Self {
            technique,
            threshold: Self::DEFAULT_THRESHOLD,
            grid_step: Self::DEFAULT_GRID_STEP,
            bins: Self::DEFAULT_BINS,
            denominator_guard: Self::DEFAULT_GUARD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidParameter(format!(
                "threshold {} is outside [0, 1]",
                self.threshold
            )));
        }
        if !(self.grid_step > 0.0 && self.grid_step <= 0.5) {
            return Err(Error::InvalidParameter(format!(
                "grid step {} is outside (0, 0.5]",
                self.grid_step
            )));
        }
        if self.bins == 0 {
            return Err(Error::InvalidParameter("bin count must be positive".into()));
        }
        if !(self.denominator_guard > 0.0 && self.denominator_guard < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "denominator guard {} is outside (0, 1)",
                self.denominator_guard
            )));
        }
        Ok(())
    }

    /// Runs the configured technique on `scores`, using `base` for whatever
    /// the technique borrows from the calibration phase.
    pub fn estimate(&self, scores: &[f64], base: &JointDistribution) -> Result<f64> {
        match self.technique {
            Technique::Pcc => estimate_pcc(scores),
            Technique::Cpcc => estimate_cpcc(scores, &base.curve),
            Technique::Cc => estimate_cc(scores, self.threshold),
            Technique::Acc => estimate_acc(scores, self.threshold, base, self.denominator_guard),
            Technique::Mixture => {
                let target = histogram_with_edges(scores, base.density.edges())?;
                estimate_mixture(&target, &base.to_class_conditionals()?, self.grid_step)
            }
            Technique::MedianSweep => {
                let target = histogram_with_edges(scores, base.density.edges())?;
                estimate_median_sweep(
                    &target,
                    &base.to_class_conditionals()?,
                    self.denominator_guard,
                )
            }
        }
    }
}

fn check_scores(scores: &[f64]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::EmptyInput("scores"));
    }
    scores.iter().try_for_each(|&s| check_score(s))
}

/// Mean raw score.
pub fn estimate_pcc(scores: &[f64]) -> Result<f64> {
    check_scores(scores)?;
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Mean calibrated probability.
pub fn estimate_cpcc(scores: &[f64], curve: &CalibrationCurve) -> Result<f64> {
    check_scores(scores)?;
    let total: f64 = scores.iter().map(|&s| curve.eval_unchecked(s)).sum();
    Ok(total / scores.len() as f64)
}

/// Fraction of scores at or above `threshold`.
pub fn estimate_cc(scores: &[f64], threshold: f64) -> Result<f64> {
    check_scores(scores)?;
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "threshold {threshold} is outside [0, 1]"
        )));
    }
    Ok(scores.iter().filter(|&&s| s >= threshold).count() as f64 / scores.len() as f64)
}

fn adjusted(above: f64, tpr: f64, fpr: f64) -> f64 {
    ((above - fpr) / (tpr - fpr)).clamp(0.0, 1.0)
}

/// Classify-and-count corrected by the base joint's true and false positive
/// rates at `threshold`.
pub fn estimate_acc(
    scores: &[f64],
    threshold: f64,
    base_joint: &JointDistribution,
    guard: f64,
) -> Result<f64> {
    let above = estimate_cc(scores, threshold)?;
    let cc = base_joint.to_class_conditionals()?;
    let (tpr, fpr) = cc.rates_at(threshold);
    let gap = (tpr - fpr).abs();
    if gap < guard {
        return Err(Error::UnstableThreshold {
            threshold,
            gap,
            guard,
        });
    }
    Ok(adjusted(above, tpr, fpr))
}

fn prevalence_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidParameter(format!(
            "grid step {step} is outside (0, 0.5]"
        )));
    }
    let mut grid: Vec<f64> = (0..)
        .map(|i| i as f64 * step)
        .take_while(|&p| p < 1.0 - 1e-12)
        .collect();
    grid.push(1.0);
    Ok(grid)
}

/// Hellinger distance from the target to the base mixture at each grid
/// prevalence, in grid order.
pub fn mixture_distances(
    target: &Histogram,
    base: &ClassConditionals,
    grid_step: f64,
) -> Result<Vec<(f64, f64)>> {
    target.ensure_same_edges(&base.f_pos)?;
    base.f_pos.ensure_same_edges(&base.f_neg)?;
    let (pos, neg) = (base.f_pos.mass(), base.f_neg.mass());
    let mut mixed = vec![0.0; pos.len()];
    Ok(prevalence_grid(grid_step)?
        .into_iter()
        .map(|p| {
            for (m, (a, b)) in mixed.iter_mut().zip(pos.iter().zip(neg)) {
                *m = p * a + (1.0 - p) * b;
            }
            (p, hellinger_unchecked(&mixed, target.mass()))
        })
        .collect())
}

/// Grid prevalence whose base mixture is closest to the target in
/// Hellinger distance; ties go to the smaller prevalence.
pub fn estimate_mixture(
    target: &Histogram,
    base: &ClassConditionals,
    grid_step: f64,
) -> Result<f64> {
    let distances = mixture_distances(target, base, grid_step)?;
    let mut best = distances[0];
    for &(p, d) in &distances[1..] {
        if d < best.1 {
            best = (p, d);
        }
    }
    Ok(best.0)
}

/// Per-threshold adjusted counts at every interior bin edge that passes the
/// guard, as `(threshold, estimate)`.
pub fn sweep_estimates(
    target: &Histogram,
    base: &ClassConditionals,
    guard: f64,
) -> Result<Vec<(f64, f64)>> {
    target.ensure_same_edges(&base.f_pos)?;
    let edges = target.edges();
    Ok(edges[1..edges.len() - 1]
        .iter()
        .filter_map(|&t| {
            let (tpr, fpr) = base.rates_at(t);
            ((tpr - fpr).abs() >= guard)
                .then(|| (t, adjusted(target.mass_at_or_above(t), tpr, fpr)))
        })
        .collect())
}

/// Median of the guarded per-threshold adjusted counts.
pub fn estimate_median_sweep(
    target: &Histogram,
    base: &ClassConditionals,
    guard: f64,
) -> Result<f64> {
    let mut values: Vec<f64> = sweep_estimates(target, base, guard)?
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    if values.is_empty() {
        return Err(Error::NoValidThreshold(guard));
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    Ok(if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    })
}
