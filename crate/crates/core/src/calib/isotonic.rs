use crate::curve::CalibrationCurve;
use crate::error::{Error, Result};
use crate::item::check_score;

struct Block {
    start: f64,
    sum: f64,
    weight: f64,
}

impl Block {
    fn mean(&self) -> f64 {
        self.sum / self.weight
    }
}

/// Least-squares nondecreasing fit of the labels on the score by pool
/// adjacent violators. Tied scores are pooled before fitting.
pub fn fit_isotonic(points: &[(f64, bool)]) -> Result<CalibrationCurve> {
    if points.is_empty() {
        return Err(Error::EmptyInput("labeled calibration sample"));
    }
    let mut sorted: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &(s, y) in points {
        check_score(s)?;
        sorted.push((s, f64::from(u8::from(y))));
    }
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut blocks: Vec<Block> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let start = sorted[i].0;
        let mut block = Block {
            start,
            sum: 0.0,
            weight: 0.0,
        };
        while i < sorted.len() && sorted[i].0 == start {
            block.sum += sorted[i].1;
            block.weight += 1.0;
            i += 1;
        }
        while let Some(prev) = blocks.last() {
            if prev.mean() < block.mean() {
                break;
            }
            let prev = blocks.pop().expect("checked above");
            block = Block {
                start: prev.start,
                sum: prev.sum + block.sum,
                weight: prev.weight + block.weight,
            };
        }
        blocks.push(block);
    }

    let scores = blocks.iter().map(|b| b.start).collect();
    let probs = blocks.iter().map(|b| b.mean().clamp(0.0, 1.0)).collect();
    Ok(CalibrationCurve::Isotonic { scores, probs })
}
