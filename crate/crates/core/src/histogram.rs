//! Normalized binned densities over `[0, 1]`.
//!
//! Bins are right-open except the last, which is closed at 1. A score `s`
//! falls in bin `i` iff `edges[i] <= s < edges[i + 1]` (or `s == 1` for the
//! last bin). The same membership rule is used for calibration strata and
//! binned curves, so a threshold placed on a bin edge splits scores and
//! bins identically.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::item::check_score;

const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHistogram")]
pub struct Histogram {
    edges: Vec<f64>,
    mass: Vec<f64>,
}

#[derive(Deserialize)]
struct RawHistogram {
    edges: Vec<f64>,
    mass: Vec<f64>,
}

impl TryFrom<RawHistogram> for Histogram {
    type Error = Error;

    fn try_from(raw: RawHistogram) -> Result<Self> {
        Histogram::new(raw.edges, raw.mass)
    }
}

/// `bins + 1` equally spaced edges from 0 to 1.
pub fn uniform_edges(bins: usize) -> Vec<f64> {
    (0..=bins).map(|i| i as f64 / bins as f64).collect()
}

pub(crate) fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidHistogram("need at least two edges".into()));
    }
    if edges[0] != 0.0 || edges[edges.len() - 1] != 1.0 {
        return Err(Error::InvalidHistogram(
            "edges must span exactly [0, 1]".into(),
        ));
    }
    if edges
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
    {
        return Err(Error::InvalidHistogram(
            "edges must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Index of the bin containing `score`, given validated edges.
pub(crate) fn locate(edges: &[f64], score: f64) -> usize {
    let interior = &edges[1..edges.len() - 1];
    interior.partition_point(|&e| e <= score)
}

impl Histogram {
    /// Builds a histogram from already-normalized masses.
    pub fn new(edges: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        validate_edges(&edges)?;
        if mass.len() + 1 != edges.len() {
            return Err(Error::InvalidHistogram(format!(
                "{} edges need {} masses, got {}",
                edges.len(),
                edges.len() - 1,
                mass.len()
            )));
        }
        if mass.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::InvalidHistogram(
                "masses must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidHistogram(format!(
                "masses sum to {total}, not 1"
            )));
        }
        Ok(Self { edges, mass })
    }

    /// Builds a histogram from nonnegative weights, normalizing them.
    pub fn from_weights(edges: Vec<f64>, weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || !total.is_finite() {
            return Err(Error::InvalidHistogram(
                "weights have no positive mass".into(),
            ));
        }
        Self::new(edges, weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("bin count must be positive".into()));
        }
        Self::new(uniform_edges(bins), vec![1.0 / bins as f64; bins])
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn bins(&self) -> usize {
        self.mass.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn bin_of(&self, score: f64) -> Result<usize> {
        check_score(score)?;
        Ok(locate(&self.edges, score))
    }

    pub fn same_edges(&self, other: &Histogram) -> bool {
        self.edges == other.edges
    }

    pub(crate) fn ensure_same_edges(&self, other: &Histogram) -> Result<()> {
        if self.same_edges(other) {
            Ok(())
        } else {
            Err(Error::EdgeMismatch)
        }
    }

    /// Total mass of the bins whose midpoint is at or above `threshold`.
    pub fn mass_at_or_above(&self, threshold: f64) -> f64 {
        self.centers()
            .iter()
            .zip(&self.mass)
            .filter(|(c, _)| **c >= threshold)
            .map(|(_, m)| m)
            .sum()
    }
}

/// Empirical density of `scores` on `bins` equal-width bins.
pub fn histogram_of(scores: &[f64], bins: usize) -> Result<Histogram> {
    histogram_on_edges(scores, uniform_edges(bins.max(1)), bins)
}

/// Empirical density of `scores` on the given edges.
pub fn histogram_with_edges(scores: &[f64], edges: &[f64]) -> Result<Histogram> {
    validate_edges(edges)?;
    histogram_on_edges(scores, edges.to_vec(), edges.len() - 1)
}

fn histogram_on_edges(scores: &[f64], edges: Vec<f64>, bins: usize) -> Result<Histogram> {
    if bins == 0 {
        return Err(Error::InvalidParameter("bin count must be positive".into()));
    }
    if scores.is_empty() {
        return Err(Error::EmptyInput("scores"));
    }
    let mut counts = vec![0usize; bins];
    for &s in scores {
        check_score(s)?;
        counts[locate(&edges, s)] += 1;
    }
    let n = scores.len() as f64;
    Histogram::new(edges, counts.iter().map(|&c| c as f64 / n).collect())
}

/// Convex combination `p * f_pos + (1 - p) * f_neg`, bin by bin.
pub fn mix(f_pos: &Histogram, f_neg: &Histogram, p: f64) -> Result<Histogram> {
    f_pos.ensure_same_edges(f_neg)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "mixture weight {p} is outside [0, 1]"
        )));
    }
    let mass = f_pos
        .mass
        .iter()
        .zip(&f_neg.mass)
        .map(|(a, b)| p * a + (1.0 - p) * b)
        .collect();
    Ok(Histogram {
        edges: f_pos.edges.clone(),
        mass,
    })
}

/// Hellinger distance between two histograms on shared edges, in `[0, 1]`.
pub fn hellinger(h1: &Histogram, h2: &Histogram) -> Result<f64> {
    h1.ensure_same_edges(h2)?;
    Ok(hellinger_unchecked(&h1.mass, &h2.mass))
}

pub(crate) fn hellinger_unchecked(a: &[f64], b: &[f64]) -> f64 {
    let sq: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x.sqrt() - y.sqrt();
            d * d
        })
        .sum();
    (sq.sqrt() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}
