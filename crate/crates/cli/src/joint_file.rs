//! The joint-distribution JSON written by `calibrate`.
//!
//! The top level is the base joint distribution itself
//! (`{"edges", "mass", "curve"}`). An optional `calibration` object carries
//! the labeled sample and its design so later commands can bootstrap.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use prevalence_core::{CurveFitter, JointDistribution, ScoredItem, StratifiedSample};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub fitter: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clip_epsilon: Option<f64>,
    pub strata_bounds: Vec<f64>,
    pub population_counts: Vec<usize>,
    pub strata: Vec<usize>,
    pub sample: Vec<ScoredItem>,
}

impl CalibrationRecord {
    pub fn new(fitter: CurveFitter, sample: &StratifiedSample) -> Self {
        let clip_epsilon = match fitter {
            CurveFitter::Temperature { clip_epsilon } => Some(clip_epsilon),
            _ => None,
        };
        Self {
            fitter: fitter.name().to_string(),
            clip_epsilon,
            strata_bounds: sample.bounds.clone(),
            population_counts: sample.population_counts.clone(),
            strata: sample.strata.clone(),
            sample: sample.items.clone(),
        }
    }

    /// The fitter, with binned fits using `bins` bins.
    pub fn fitter(&self, bins: usize) -> Result<CurveFitter> {
        Ok(match self.fitter.parse()? {
            CurveFitter::Binned { .. } => CurveFitter::Binned { bins },
            CurveFitter::Temperature { clip_epsilon } => CurveFitter::Temperature {
                clip_epsilon: self.clip_epsilon.unwrap_or(clip_epsilon),
            },
            other => other,
        })
    }

    pub fn stratified_sample(&self) -> StratifiedSample {
        StratifiedSample {
            items: self.sample.clone(),
            strata: self.strata.clone(),
            bounds: self.strata_bounds.clone(),
            population_counts: self.population_counts.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointFile {
    #[serde(flatten)]
    pub joint: JointDistribution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<CalibrationRecord>,
}

impl JointFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("invalid joint distribution in {}", path.display()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
    }
}
