//! Simulated labeled datasets from known joint distributions.
//!
//! The intrinsic process draws the label first and the score from the
//! label's Beta density, so class-conditional densities are stable across
//! datasets that differ only in `prev`. The extrinsic process draws the score
//! from a two-component Beta mixture and the label from a fixed Platt curve,
//! so the calibration curve is stable across datasets that differ only in the
//! score density.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;

use crate::curve::{sigmoid, CalibrationCurve};
use crate::error::{Error, Result};
use crate::item::{Label, ScoredItem};

const INTEGRATION_PANELS: usize = 20_000;

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicSpec {
    pub alpha_pos: f64,
    pub beta_pos: f64,
    pub alpha_neg: f64,
    pub beta_neg: f64,
    pub prev: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrinsicSpec {
    pub w: f64,
    pub b: f64,
    pub alpha1: f64,
    pub beta1: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub lambda: f64,
}

fn check_shape(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be a positive shape, got {v}"
        )))
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must lie in [0, 1], got {v}"
        )))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter(
            "dataset size must be at least 1".into(),
        ))
    } else {
        Ok(())
    }
}

fn beta(a: f64, b: f64) -> Result<Beta<f64>> {
    Beta::new(a, b).map_err(|e| Error::InvalidParameter(format!("Beta({a}, {b}): {e}")))
}

impl IntrinsicSpec {
    pub fn validate(&self) -> Result<()> {
        check_shape("alpha_pos", self.alpha_pos)?;
        check_shape("beta_pos", self.beta_pos)?;
        check_shape("alpha_neg", self.alpha_neg)?;
        check_shape("beta_neg", self.beta_neg)?;
        check_unit("prev", self.prev)
    }

    pub fn with_prev(self, prev: f64) -> Self {
        Self { prev, ..self }
    }
}

impl ExtrinsicSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.w.is_finite() || !self.b.is_finite() {
            return Err(Error::InvalidParameter("w and b must be finite".into()));
        }
        check_shape("alpha1", self.alpha1)?;
        check_shape("beta1", self.beta1)?;
        check_shape("alpha2", self.alpha2)?;
        check_shape("beta2", self.beta2)?;
        check_unit("lambda", self.lambda)
    }

    pub fn curve(&self) -> CalibrationCurve {
        CalibrationCurve::Platt {
            w: self.w,
            b: self.b,
        }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }
}

/// Label ~ Bernoulli(prev), then score ~ the label's Beta density.
pub fn gen_intrinsic(spec: &IntrinsicSpec, n: usize, seed: u64) -> Result<Vec<ScoredItem>> {
    spec.validate()?;
    check_n(n)?;
    let pos = beta(spec.alpha_pos, spec.beta_pos)?;
    let neg = beta(spec.alpha_neg, spec.beta_neg)?;
    let mut rng = rng_from_seed(seed);
    Ok((0..n)
        .map(|i| {
            let positive = rng.random_bool(spec.prev);
            let score = if positive {
                pos.sample(&mut rng)
            } else {
                neg.sample(&mut rng)
            };
            ScoredItem {
                id: i.to_string(),
                score: score.clamp(0.0, 1.0),
                label: Some(Label::from_bool(positive)),
            }
        })
        .collect())
}

/// Score ~ lambda·Beta1 + (1 − lambda)·Beta2, then label ~ Bernoulli(sigmoid(w·score + b)).
pub fn gen_extrinsic(spec: &ExtrinsicSpec, n: usize, seed: u64) -> Result<Vec<ScoredItem>> {
    spec.validate()?;
    check_n(n)?;
    let first = beta(spec.alpha1, spec.beta1)?;
    let second = beta(spec.alpha2, spec.beta2)?;
    let curve = spec.curve();
    let mut rng = rng_from_seed(seed);
    Ok((0..n)
        .map(|i| {
            let score = if rng.random_bool(spec.lambda) {
                first.sample(&mut rng)
            } else {
                second.sample(&mut rng)
            }
            .clamp(0.0, 1.0);
            let positive = rng.random_bool(curve.eval_unchecked(score));
            ScoredItem {
                id: i.to_string(),
                score,
                label: Some(Label::from_bool(positive)),
            }
        })
        .collect())
}

fn beta_pdf(x: f64, a: f64, b: f64, ln_norm: f64) -> f64 {
    // Endpoints are only evaluated when both shapes are >= 1.
    let edge_shape = if x <= 0.0 {
        a
    } else if x >= 1.0 {
        b
    } else {
        return ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - ln_norm).exp();
    };
    if edge_shape > 1.0 {
        0.0
    } else {
        (-ln_norm).exp()
    }
}

/// Expected label probability `E[sigmoid(w·C + b)]` under the spec's score
/// mixture, by composite Simpson quadrature (midpoint rule when a shape
/// below 1 makes the density unbounded at an endpoint).
pub fn true_prevalence_extrinsic(spec: &ExtrinsicSpec) -> Result<f64> {
    spec.validate()?;
    if spec.w == 0.0 {
        return Ok(sigmoid(spec.b));
    }
    let (a1, b1, a2, b2) = (spec.alpha1, spec.beta1, spec.alpha2, spec.beta2);
    let (n1, n2) = (ln_beta(a1, b1), ln_beta(a2, b2));
    let integrand = |x: f64| {
        let density =
            spec.lambda * beta_pdf(x, a1, b1, n1) + (1.0 - spec.lambda) * beta_pdf(x, a2, b2, n2);
        density * sigmoid(spec.w * x + spec.b)
    };
    let n = INTEGRATION_PANELS;
    let h = 1.0 / n as f64;
    let bounded = [a1, b1, a2, b2].iter().all(|&s| s >= 1.0);
    let value = if bounded {
        let interior: f64 = (1..n)
            .map(|i| {
                let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
                weight * integrand(i as f64 * h)
            })
            .sum();
        (integrand(0.0) + interior + integrand(1.0)) * h / 3.0
    } else {
        (0..n).map(|i| integrand((i as f64 + 0.5) * h)).sum::<f64>() * h
    };
    Ok(value.clamp(0.0, 1.0))
}

/// Which of the two generating processes a preset uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GeneratorSpec {
    Intrinsic(IntrinsicSpec),
    Extrinsic(ExtrinsicSpec),
}

impl GeneratorSpec {
    pub fn generate(&self, n: usize, seed: u64) -> Result<Vec<ScoredItem>> {
        match self {
            GeneratorSpec::Intrinsic(s) => gen_intrinsic(s, n, seed),
            GeneratorSpec::Extrinsic(s) => gen_extrinsic(s, n, seed),
        }
    }

    /// Population positive fraction implied by the parameters.
    pub fn true_prevalence(&self) -> Result<f64> {
        match self {
            GeneratorSpec::Intrinsic(s) => s.validate().map(|_| s.prev),
            GeneratorSpec::Extrinsic(s) => true_prevalence_extrinsic(s),
        }
    }
}

/// The four simulated scenarios, each with a base and a target variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    IntrinsicStrong,
    IntrinsicWeak,
    ExtrinsicStrong,
    ExtrinsicWeak,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Base,
    Target,
}

pub const BASE_PREV: f64 = 0.2;
pub const TARGET_PREV: f64 = 0.6;
pub const BASE_LAMBDA: f64 = 0.2;
pub const TARGET_LAMBDA: f64 = 0.6;

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::IntrinsicStrong,
        Scenario::IntrinsicWeak,
        Scenario::ExtrinsicStrong,
        Scenario::ExtrinsicWeak,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::IntrinsicStrong => "intrinsic-strong",
            Scenario::IntrinsicWeak => "intrinsic-weak",
            Scenario::ExtrinsicStrong => "extrinsic-strong",
            Scenario::ExtrinsicWeak => "extrinsic-weak",
        }
    }

    pub fn is_intrinsic(self) -> bool {
        matches!(self, Scenario::IntrinsicStrong | Scenario::IntrinsicWeak)
    }

    pub fn spec(self, role: Role) -> GeneratorSpec {
        let prev = match role {
            Role::Base => BASE_PREV,
            Role::Target => TARGET_PREV,
        };
        let lambda = match role {
            Role::Base => BASE_LAMBDA,
            Role::Target => TARGET_LAMBDA,
        };
        let intrinsic = |alpha_pos, beta_pos| {
            GeneratorSpec::Intrinsic(IntrinsicSpec {
                alpha_pos,
                beta_pos,
                alpha_neg: 2.0,
                beta_neg: 5.0,
                prev,
            })
        };
        let extrinsic = |w, b| {
            GeneratorSpec::Extrinsic(ExtrinsicSpec {
                w,
                b,
                alpha1: 10.0,
                beta1: 2.0,
                alpha2: 2.0,
                beta2: 5.0,
                lambda,
            })
        };
        match self {
            Scenario::IntrinsicStrong => intrinsic(10.0, 2.0),
            Scenario::IntrinsicWeak => intrinsic(7.0, 6.0),
            Scenario::ExtrinsicStrong => extrinsic(25.0, -15.0),
            Scenario::ExtrinsicWeak => extrinsic(0.5, -1.0),
        }
    }
}

/// A named scenario/role pair such as `intrinsic-strong-base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Preset {
    pub scenario: Scenario,
    pub role: Role,
}

impl Preset {
    pub fn all() -> impl Iterator<Item = Preset> {
        Scenario::ALL.into_iter().flat_map(|scenario| {
            [Role::Base, Role::Target]
                .into_iter()
                .map(move |role| Preset { scenario, role })
        })
    }

    pub fn spec(self) -> GeneratorSpec {
        self.scenario.spec(self.role)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let role = match self.role {
            Role::Base => "base",
            Role::Target => "target",
        };
        write!(f, "{}-{}", self.scenario.name(), role)
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::all()
            .find(|p| p.to_string() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "preset",
                name: s.to_string(),
            })
    }
}
