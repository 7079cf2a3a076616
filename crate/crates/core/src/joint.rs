//! The two equivalent descriptions of a joint score/label distribution.
//!
//! A [`JointDistribution`] pairs a score density with a calibration curve. A
//! [`ClassConditionals`] pairs a prevalence with the positive and negative
//! score densities. Integrals over scores use bin midpoints.

use serde::{Deserialize, Serialize};

use crate::curve::CalibrationCurve;
use crate::error::{Error, Result};
use crate::histogram::{mix, Histogram};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    #[serde(flatten)]
    pub density: Histogram,
    pub curve: CalibrationCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConditionals", into = "RawConditionals")]
pub struct ClassConditionals {
    pub f_pos: Histogram,
    pub f_neg: Histogram,
    pub prevalence: f64,
}

#[derive(Serialize, Deserialize)]
struct RawConditionals {
    edges: Vec<f64>,
    f_pos: Vec<f64>,
    f_neg: Vec<f64>,
    prevalence: f64,
}

impl TryFrom<RawConditionals> for ClassConditionals {
    type Error = Error;

    fn try_from(raw: RawConditionals) -> Result<Self> {
        ClassConditionals::new(
            Histogram::new(raw.edges.clone(), raw.f_pos)?,
            Histogram::new(raw.edges, raw.f_neg)?,
            raw.prevalence,
        )
    }
}

impl From<ClassConditionals> for RawConditionals {
    fn from(cc: ClassConditionals) -> Self {
        RawConditionals {
            edges: cc.f_pos.edges().to_vec(),
            f_pos: cc.f_pos.mass().to_vec(),
            f_neg: cc.f_neg.mass().to_vec(),
            prevalence: cc.prevalence,
        }
    }
}

impl ClassConditionals {
    pub fn new(f_pos: Histogram, f_neg: Histogram, prevalence: f64) -> Result<Self> {
        f_pos.ensure_same_edges(&f_neg)?;
        if !(0.0..=1.0).contains(&prevalence) {
            return Err(Error::InvalidParameter(format!(
                "prevalence {prevalence} is outside [0, 1]"
            )));
        }
        Ok(Self {
            f_pos,
            f_neg,
            prevalence,
        })
    }

    /// Score density of a population with positive fraction `p`.
    pub fn mixture(&self, p: f64) -> Result<Histogram> {
        mix(&self.f_pos, &self.f_neg, p)
    }

    /// `(tpr, fpr)` for the rule "positive iff score >= threshold", with bin
    /// membership decided by bin midpoints.
    pub fn rates_at(&self, threshold: f64) -> (f64, f64) {
        (
            self.f_pos.mass_at_or_above(threshold),
            self.f_neg.mass_at_or_above(threshold),
        )
    }

    pub fn to_joint(&self) -> Result<JointDistribution> {
        JointDistribution::from_class_conditionals(self)
    }
}

impl JointDistribution {
    pub fn new(density: Histogram, curve: CalibrationCurve) -> Result<Self> {
        curve.validate()?;
        Ok(Self { density, curve })
    }

    fn curve_at_centers(&self) -> Vec<f64> {
        self.density
            .centers()
            .into_iter()
            .map(|c| self.curve.eval_unchecked(c))
            .collect()
    }

    /// Positive fraction implied by the joint: the density-weighted mean of
    /// the curve at bin midpoints.
    pub fn prevalence(&self) -> f64 {
        self.curve_at_centers()
            .iter()
            .zip(self.density.mass())
            .map(|(c, m)| c * m)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    pub fn to_class_conditionals(&self) -> Result<ClassConditionals> {
        let probs = self.curve_at_centers();
        let pos: Vec<f64> = probs
            .iter()
            .zip(self.density.mass())
            .map(|(c, m)| m * c)
            .collect();
        let neg: Vec<f64> = probs
            .iter()
            .zip(self.density.mass())
            .map(|(c, m)| m * (1.0 - c))
            .collect();
        let pos_total: f64 = pos.iter().sum();
        let neg_total: f64 = neg.iter().sum();
        if pos_total.is_nan() || pos_total <= 0.0 || neg_total.is_nan() || neg_total <= 0.0 {
            return Err(Error::DegenerateClass(pos_total.clamp(0.0, 1.0)));
        }
        let edges = self.density.edges().to_vec();
        ClassConditionals::new(
            Histogram::from_weights(edges.clone(), &pos)?,
            Histogram::from_weights(edges, &neg)?,
            pos_total.min(1.0),
        )
    }

    /// Inverse of [`to_class_conditionals`](Self::to_class_conditionals). Bins
    /// with zero density get curve value 0.5.
    pub fn from_class_conditionals(cc: &ClassConditionals) -> Result<Self> {
        let p = cc.prevalence;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::DegenerateClass(p));
        }
        let density = cc.mixture(p)?;
        let probs = cc
            .f_pos
            .mass()
            .iter()
            .zip(density.mass())
            .map(|(fp, d)| {
                if *d > 0.0 {
                    (p * fp / d).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            })
            .collect();
        let edges = density.edges().to_vec();
        Ok(Self {
            density,
            curve: CalibrationCurve::Binned { edges, probs },
        })
    }
}
