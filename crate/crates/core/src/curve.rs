//! Calibration curves: maps from a classifier score to `P(y = + | score)`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::histogram::{locate, validate_edges};
use crate::item::check_score;

/// Logistic function `1 / (1 + exp(-z))`, stable for large `|z|`.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", try_from = "RawCurve")]
pub enum CalibrationCurve {
    /// Piecewise-constant probability per bin.
    Binned {
        edges: Vec<f64>,
        probs: Vec<f64>,
    },
    /// `sigmoid(w * score + b)`.
    Platt {
        w: f64,
        b: f64,
    },
    /// Step function from a pool-adjacent-violators fit. `scores[i]` is the
    /// lowest score of block `i`.
    Isotonic {
        scores: Vec<f64>,
        probs: Vec<f64>,
    },
    /// `sigmoid(logit(clip(score)) / t)` with `clip` bounding the score into
    /// `[clip_epsilon, 1 - clip_epsilon]`.
    Temperature {
        t: f64,
        clip_epsilon: f64,
    },
    /// `p_above` for scores at or above `threshold`, `p_below` otherwise.
    Step {
        threshold: f64,
        p_below: f64,
        p_above: f64,
    },
    Identity,
}

// Mirror of the public enum used only to route deserialization through
// `validate`.
#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RawCurve {
    Binned {
        edges: Vec<f64>,
        probs: Vec<f64>,
    },
    Platt {
        w: f64,
        b: f64,
    },
    Isotonic {
        scores: Vec<f64>,
        probs: Vec<f64>,
    },
    Temperature {
        t: f64,
        clip_epsilon: f64,
    },
    Step {
        threshold: f64,
        p_below: f64,
        p_above: f64,
    },
    Identity,
}

impl TryFrom<RawCurve> for CalibrationCurve {
    type Error = Error;

    fn try_from(raw: RawCurve) -> Result<Self> {
        let curve = match raw {
            RawCurve::Binned { edges, probs } => CalibrationCurve::Binned { edges, probs },
            RawCurve::Platt { w, b } => CalibrationCurve::Platt { w, b },
            RawCurve::Isotonic { scores, probs } => CalibrationCurve::Isotonic { scores, probs },
            RawCurve::Temperature { t, clip_epsilon } => {
                CalibrationCurve::Temperature { t, clip_epsilon }
            }
            RawCurve::Step {
                threshold,
                p_below,
                p_above,
            } => CalibrationCurve::Step {
                threshold,
                p_below,
                p_above,
            },
            RawCurve::Identity => CalibrationCurve::Identity,
        };
        curve.validate()?;
        Ok(curve)
    }
}

fn is_prob(p: f64) -> bool {
    p.is_finite() && (0.0..=1.0).contains(&p)
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidCurve(msg.into())
}

impl CalibrationCurve {
    pub fn kind(&self) -> &'static str {
        match self {
            CalibrationCurve::Binned { .. } => "binned",
            CalibrationCurve::Platt { .. } => "platt",
            CalibrationCurve::Isotonic { .. } => "isotonic",
            CalibrationCurve::Temperature { .. } => "temperature",
            CalibrationCurve::Step { .. } => "step",
            CalibrationCurve::Identity => "identity",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CalibrationCurve::Binned { edges, probs } => {
                validate_edges(edges).map_err(|e| invalid(e.to_string()))?;
                if probs.len() + 1 != edges.len() {
                    return Err(invalid("binned curve needs one probability per bin"));
                }
                if !probs.iter().all(|&p| is_prob(p)) {
                    return Err(invalid("binned probabilities must lie in [0, 1]"));
                }
            }
            CalibrationCurve::Platt { w, b } => {
                if !w.is_finite() || !b.is_finite() {
                    return Err(invalid("platt parameters must be finite"));
                }
            }
            CalibrationCurve::Isotonic { scores, probs } => {
                if scores.is_empty() || scores.len() != probs.len() {
                    return Err(invalid(
                        "isotonic curve needs matching, nonempty breakpoints",
                    ));
                }
                if scores
                    .windows(2)
                    .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
                {
                    return Err(invalid("isotonic breakpoints must be strictly increasing"));
                }
                if probs.windows(2).any(|w| w[0] > w[1]) {
                    return Err(invalid("isotonic probabilities must be nondecreasing"));
                }
                if !probs.iter().all(|&p| is_prob(p)) || !scores.iter().all(|&s| is_prob(s)) {
                    return Err(invalid("isotonic breakpoints must lie in [0, 1]"));
                }
            }
            CalibrationCurve::Temperature { t, clip_epsilon } => {
                if !(t.is_finite() && *t > 0.0) {
                    return Err(invalid("temperature must be positive"));
                }
                if !(*clip_epsilon > 0.0 && *clip_epsilon < 0.5) {
                    return Err(invalid("clip epsilon must lie in (0, 0.5)"));
                }
            }
            CalibrationCurve::Step {
                threshold,
                p_below,
                p_above,
            } => {
                if !is_prob(*threshold) || !is_prob(*p_below) || !is_prob(*p_above) {
                    return Err(invalid(
                        "step threshold and probabilities must lie in [0, 1]",
                    ));
                }
            }
            CalibrationCurve::Identity => {}
        }
        Ok(())
    }

    /// `P(y = + | score)` under this curve.
    pub fn eval(&self, score: f64) -> Result<f64> {
        check_score(score)?;
        Ok(self.eval_unchecked(score))
    }

    /// Evaluation for a score already known to lie in `[0, 1]`.
    pub(crate) fn eval_unchecked(&self, score: f64) -> f64 {
        match self {
            CalibrationCurve::Binned { edges, probs } => probs[locate(edges, score)],
            CalibrationCurve::Platt { w, b } => sigmoid(w * score + b),
            CalibrationCurve::Isotonic { scores, probs } => {
                let above = scores.partition_point(|&s| s <= score);
                probs[above.saturating_sub(1)]
            }
            CalibrationCurve::Temperature { t, clip_epsilon } => {
                let s = score.clamp(*clip_epsilon, 1.0 - clip_epsilon);
                sigmoid(logit(s) / t)
            }
            CalibrationCurve::Step {
                threshold,
                p_below,
                p_above,
            } => {
                if score >= *threshold {
                    *p_above
                } else {
                    *p_below
                }
            }
            CalibrationCurve::Identity => score,
        }
    }
}
