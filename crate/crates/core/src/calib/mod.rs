//! Calibration phase: choose a labeled sample from a scored base dataset,
//! fit a calibration curve to it, and attach that curve to the base score
//! density.

mod fit;
mod isotonic;
mod sample;

pub use fit::{
    fit_binned, fit_platt, fit_temperature, platt_gradient, platt_objective, temperature_objective,
    CurveFitter, PLATT_RIDGE,
};
pub use isotonic::fit_isotonic;
pub use sample::{
    neyman_allocation, sample_neyman, sample_random, sample_uniform_strata, stratify,
    Stratification, StratifiedSample,
};

use crate::curve::CalibrationCurve;
use crate::error::Result;
use crate::histogram::histogram_of;
use crate::joint::JointDistribution;

/// Base joint distribution: the empirical density of every base score, paired
/// with a curve fit on the calibration sample.
pub fn build_base_joint(
    base_scores: &[f64],
    curve: CalibrationCurve,
    bins: usize,
) -> Result<JointDistribution> {
    JointDistribution::new(histogram_of(base_scores, bins)?, curve)
}
