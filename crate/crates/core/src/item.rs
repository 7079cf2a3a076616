use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Positive)
    }

    pub fn from_bool(positive: bool) -> Self {
        if positive {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

/// One dataset row: a classifier score with an optional ground-truth label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredItem {
    pub id: String,
    pub score: f64,
    pub label: Option<Label>,
}

impl ScoredItem {
    pub fn new(id: impl Into<String>, score: f64, label: Option<Label>) -> Result<Self> {
        check_score(score)?;
        Ok(Self {
            id: id.into(),
            score,
            label,
        })
    }

    pub fn labeled(id: impl Into<String>, score: f64, positive: bool) -> Result<Self> {
        Self::new(id, score, Some(Label::from_bool(positive)))
    }
}

pub(crate) fn check_score(score: f64) -> Result<()> {
    if score.is_finite() && (0.0..=1.0).contains(&score) {
        Ok(())
    } else {
        Err(Error::ScoreOutOfRange(score))
    }
}

/// Scores of every item, in order.
pub fn scores_of(items: &[ScoredItem]) -> Vec<f64> {
    items.iter().map(|item| item.score).collect()
}

/// `(score, is_positive)` pairs of the labeled items only.
pub fn labeled_points(items: &[ScoredItem]) -> Vec<(f64, bool)> {
    items
        .iter()
        .filter_map(|item| item.label.map(|l| (item.score, l.is_positive())))
        .collect()
}
