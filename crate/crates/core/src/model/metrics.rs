use serde::Serialize;
use thiserror::Error;

use super::{AestheticScores, Attribute};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 points, got {0}")]
    TooFew(usize),
    #[error("correlation undefined: constant input")]
    Constant,
    #[error("non-finite input")]
    NonFinite,
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && xs[idx[j]] == xs[idx[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, MetricError> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricError::Constant);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64, MetricError> {
    if xs.len() != ys.len() {
        return Err(MetricError::LengthMismatch(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(MetricError::TooFew(xs.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(MetricError::NonFinite);
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeCorrelation {
    pub attribute: Attribute,
    pub spearman: Option<f64>,
}

/// Correlations are `None` where undefined (fewer than two points, or a
/// constant side).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub n: usize,
    pub spearman_overall: Option<f64>,
    pub accuracy: f64,
    pub attributes: Vec<AttributeCorrelation>,
    pub mean_loss: f64,
}

/// Metrics over paired predictions and targets. `losses` are per-item loss
/// values (averaged into `mean_loss`).
pub fn metrics_from_predictions(
    preds: &[AestheticScores],
    targets: &[AestheticScores],
    losses: &[f64],
) -> EvalReport {
    assert_eq!(preds.len(), targets.len());
    let n = preds.len();
    let hits = preds
        .iter()
        .zip(targets)
        .filter(|(p, t)| (p.overall() > 0.5) == (t.overall() > 0.5))
        .count();
    let column = |f: &dyn Fn(&AestheticScores) -> f64, v: &[AestheticScores]| v.iter().map(f).collect::<Vec<_>>();
    let corr = |f: &dyn Fn(&AestheticScores) -> f64| spearman(&column(f, preds), &column(f, targets)).ok();
    EvalReport {
        n,
        spearman_overall: corr(&|s| s.overall()),
        accuracy: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
        attributes: Attribute::ALL
            .iter()
            .map(|&a| AttributeCorrelation {
                attribute: a,
                spearman: corr(&|s| s.attribute(a)),
            })
            .collect(),
        mean_loss: if losses.is_empty() {
            0.0
        } else {
            losses.iter().sum::<f64>() / losses.len() as f64
        },
    }
}
