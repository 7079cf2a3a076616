//! Parametric and binned curve fitters. Every fitter takes `(score,
//! is_positive)` pairs; see [`crate::item::labeled_points`].

use std::fmt;
use std::str::FromStr;

use crate::curve::{logit, sigmoid, CalibrationCurve};
use crate::error::{Error, Result};
use crate::histogram::{locate, uniform_edges};
use crate::item::check_score;

use super::isotonic::fit_isotonic;

/// Ridge weight on `w² + b²` in the Platt objective.
pub const PLATT_RIDGE: f64 = 1e-6;
const PLATT_GRADIENT_TOL: f64 = 1e-8;
const PLATT_MAX_ITER: usize = 100;
const LOG_T_RANGE: (f64, f64) = (-4.0, 4.0);
const GOLDEN_TOL: f64 = 1e-6;

fn check_points(points: &[(f64, bool)]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyInput("labeled calibration sample"));
    }
    points.iter().try_for_each(|&(s, _)| check_score(s))
}

fn require_both_classes(points: &[(f64, bool)]) -> Result<()> {
    let positives = points.iter().filter(|p| p.1).count();
    if positives == 0 || positives == points.len() {
        Err(Error::DegenerateFit)
    } else {
        Ok(())
    }
}

/// Per-bin positive fraction on `bins` equal-width bins; empty bins take the
/// overall positive fraction.
pub fn fit_binned(points: &[(f64, bool)], bins: usize) -> Result<CalibrationCurve> {
    check_points(points)?;
    if bins == 0 {
        return Err(Error::InvalidParameter("bin count must be positive".into()));
    }
    let edges = uniform_edges(bins);
    let mut pos = vec![0usize; bins];
    let mut all = vec![0usize; bins];
    for &(s, y) in points {
        let b = locate(&edges, s);
        all[b] += 1;
        pos[b] += usize::from(y);
    }
    let overall = pos.iter().sum::<usize>() as f64 / points.len() as f64;
    let probs = pos
        .iter()
        .zip(&all)
        .map(|(&p, &n)| if n > 0 { p as f64 / n as f64 } else { overall })
        .collect();
    Ok(CalibrationCurve::Binned { edges, probs })
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean Bernoulli negative log-likelihood of the labels under
/// `sigmoid(w·s + b)`, plus `PLATT_RIDGE·(w² + b²)`.
pub fn platt_objective(points: &[(f64, bool)], w: f64, b: f64) -> f64 {
    let nll: f64 = points
        .iter()
        .map(|&(s, y)| {
            let z = w * s + b;
            softplus(z) - if y { z } else { 0.0 }
        })
        .sum();
    nll / points.len() as f64 + PLATT_RIDGE * (w * w + b * b)
}

/// Gradient of [`platt_objective`] with respect to `(w, b)`.
pub fn platt_gradient(points: &[(f64, bool)], w: f64, b: f64) -> [f64; 2] {
    let n = points.len() as f64;
    let (mut gw, mut gb) = (0.0, 0.0);
    for &(s, y) in points {
        let r = sigmoid(w * s + b) - f64::from(u8::from(y));
        gw += r * s;
        gb += r;
    }
    [
        gw / n + 2.0 * PLATT_RIDGE * w,
        gb / n + 2.0 * PLATT_RIDGE * b,
    ]
}

fn platt_hessian(points: &[(f64, bool)], w: f64, b: f64) -> [[f64; 2]; 2] {
    let n = points.len() as f64;
    let (mut hww, mut hwb, mut hbb) = (0.0, 0.0, 0.0);
    for &(s, _) in points {
        let p = sigmoid(w * s + b);
        let v = p * (1.0 - p);
        hww += v * s * s;
        hwb += v * s;
        hbb += v;
    }
    let r = 2.0 * PLATT_RIDGE;
    [[hww / n + r, hwb / n], [hwb / n, hbb / n + r]]
}

/// Damped Newton iterates of the Platt objective. Returns the final
/// parameters and the objective value after each accepted step (the first
/// entry is the starting value).
pub(crate) fn platt_newton(points: &[(f64, bool)]) -> (f64, f64, Vec<f64>) {
    let positives = points.iter().filter(|p| p.1).count() as f64;
    let base_rate = (positives / points.len() as f64).clamp(1e-6, 1.0 - 1e-6);
    let (mut w, mut b) = (0.0, logit(base_rate));
    let mut value = platt_objective(points, w, b);
    let mut trace = vec![value];
    for _ in 0..PLATT_MAX_ITER {
        let g = platt_gradient(points, w, b);
        if g[0].abs().max(g[1].abs()) < PLATT_GRADIENT_TOL {
            break;
        }
        let h = platt_hessian(points, w, b);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let (dw, db) = if det > 0.0 {
            (
                -(h[1][1] * g[0] - h[0][1] * g[1]) / det,
                -(h[0][0] * g[1] - h[1][0] * g[0]) / det,
            )
        } else {
            (-g[0], -g[1])
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let (nw, nb) = (w + step * dw, b + step * db);
            let next = platt_objective(points, nw, nb);
            if next <= value {
                w = nw;
                b = nb;
                value = next;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        trace.push(value);
    }
    (w, b, trace)
}

/// Logistic regression of the label on the score.
pub fn fit_platt(points: &[(f64, bool)]) -> Result<CalibrationCurve> {
    check_points(points)?;
    require_both_classes(points)?;
    let (w, b, _) = platt_newton(points);
    Ok(CalibrationCurve::Platt { w, b })
}

/// Mean negative log-likelihood under `sigmoid(logit(clip(s)) / t)`.
pub fn temperature_objective(points: &[(f64, bool)], t: f64, clip_epsilon: f64) -> f64 {
    let nll: f64 = points
        .iter()
        .map(|&(s, y)| {
            let z = logit(s.clamp(clip_epsilon, 1.0 - clip_epsilon)) / t;
            softplus(z) - if y { z } else { 0.0 }
        })
        .sum();
    nll / points.len() as f64
}

/// Single temperature `t` found by golden-section search over `log t`.
pub fn fit_temperature(points: &[(f64, bool)], clip_epsilon: f64) -> Result<CalibrationCurve> {
    check_points(points)?;
    if !(clip_epsilon > 0.0 && clip_epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "clip epsilon {clip_epsilon} must lie in (0, 0.5)"
        )));
    }
    require_both_classes(points)?;
    let f = |u: f64| temperature_objective(points, u.exp(), clip_epsilon);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = LOG_T_RANGE;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > GOLDEN_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    Ok(CalibrationCurve::Temperature {
        t: (0.5 * (lo + hi)).exp(),
        clip_epsilon,
    })
}

/// A curve-fitting method selectable by name.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveFitter {
    Binned { bins: usize },
    Platt,
    Isotonic,
    Temperature { clip_epsilon: f64 },
}

impl CurveFitter {
    pub const DEFAULT_BINS: usize = 20;
    pub const DEFAULT_CLIP_EPSILON: f64 = 1e-4;

    pub fn fit(&self, points: &[(f64, bool)]) -> Result<CalibrationCurve> {
        match *self {
            CurveFitter::Binned { bins } => fit_binned(points, bins),
            CurveFitter::Platt => fit_platt(points),
            CurveFitter::Isotonic => fit_isotonic(points),
            CurveFitter::Temperature { clip_epsilon } => fit_temperature(points, clip_epsilon),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CurveFitter::Binned { .. } => "binned",
            CurveFitter::Platt => "platt",
            CurveFitter::Isotonic => "isotonic",
            CurveFitter::Temperature { .. } => "temperature",
        }
    }
}

impl fmt::Display for CurveFitter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveFitter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binned" => Ok(CurveFitter::Binned {
                bins: Self::DEFAULT_BINS,
            }),
            "platt" => Ok(CurveFitter::Platt),
            "isotonic" => Ok(CurveFitter::Isotonic),
            "temperature" => Ok(CurveFitter::Temperature {
                clip_epsilon: Self::DEFAULT_CLIP_EPSILON,
            }),
            other => Err(Error::UnknownName {
                kind: "fitter",
                name: other.to_string(),
            }),
        }
    }
}
