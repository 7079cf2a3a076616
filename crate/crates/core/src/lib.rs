//! Prevalence estimation by calibrating a classifier on a labeled sample of a
//! base dataset and extrapolating to unlabeled target datasets.
//!
//! The pipeline:
//!
//! 1. draw a calibration sample from the scored base dataset
//!    ([`calib::sample_uniform_strata`], [`calib::sample_neyman`],
//!    [`calib::sample_random`]),
//! 2. fit a [`CalibrationCurve`] on its labels ([`calib::CurveFitter`]),
//! 3. attach the curve to the base score density to get a
//!    [`JointDistribution`] ([`calib::build_base_joint`]),
//! 4. estimate prevalence on a target with one of the techniques in
//!    [`estim`], and
//! 5. wrap steps 2–4 in a percentile bootstrap ([`boot`]).
//!
//! [`gen`] simulates labeled datasets with known prevalence.

pub mod boot;
pub mod calib;
pub mod curve;
pub mod error;
pub mod estim;
pub mod gen;
pub mod histogram;
pub mod item;
pub mod joint;

pub use boot::{bootstrap_estimate, CalibrationSource, EstimateReport};
pub use calib::{build_base_joint, CurveFitter, StratifiedSample};
pub use curve::CalibrationCurve;
pub use error::{Error, Result};
pub use estim::{Technique, TechniqueConfig};
pub use histogram::{hellinger, histogram_of, mix, Histogram};
pub use item::{Label, ScoredItem};
pub use joint::{ClassConditionals, JointDistribution};
