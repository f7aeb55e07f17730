use super::{AestheticScores, HeadsMode};

/// `lambda * (overall error)^2 + sum of squared attribute errors`; the
/// attribute sum is dropped in [`HeadsMode::OverallOnly`].
pub fn multi_task_loss(
    pred: &AestheticScores,
    target: &AestheticScores,
    lambda: f64,
    mode: HeadsMode,
) -> f64 {
    let d = pred.overall() - target.overall();
    let mut loss = lambda * d * d;
    if mode.trains_attributes() {
        loss += pred
            .attribute_values()
            .iter()
            .zip(target.attribute_values())
            .map(|(p, t)| (p - t) * (p - t))
            .sum::<f64>();
    }
    loss
}

/// Derivative of [`multi_task_loss`] with respect to the seven predictions.
pub fn loss_gradient(
    pred: &AestheticScores,
    target: &AestheticScores,
    lambda: f64,
    mode: HeadsMode,
) -> (f64, [f64; 6]) {
    let g_overall = 2.0 * lambda * (pred.overall() - target.overall());
    let mut g_attrs = [0.0; 6];
    if mode.trains_attributes() {
        for (g, (p, t)) in g_attrs
            .iter_mut()
            .zip(pred.attribute_values().iter().zip(target.attribute_values()))
        {
            *g = 2.0 * (p - t);
        }
    }
    (g_overall, g_attrs)
}
