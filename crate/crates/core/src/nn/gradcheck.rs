//! Central finite differences for checking analytic gradients.

use super::Tensor;

pub const STEP: f64 = 1e-5;

/// Central differences of a scalar function over every entry of `at`.
pub fn central_diff(at: &Tensor, mut f: impl FnMut(&Tensor) -> f64) -> Tensor {
    let mut probe = at.clone();
    let mut out = Tensor::zeros_like(at);
    for i in 0..at.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + STEP;
        let up = f(&probe);
        probe.data_mut()[i] = orig - STEP;
        let down = f(&probe);
        probe.data_mut()[i] = orig;
        out.data_mut()[i] = (up - down) / (2.0 * STEP);
    }
    out
}

/// `|a - n| / (|a| + |n|)` in the Euclidean norm; 0 when both vanish.
pub fn rel_error(analytic: &Tensor, numeric: &Tensor) -> f64 {
    assert_eq!(analytic.shape(), numeric.shape());
    let norm = |it: &mut dyn Iterator<Item = f64>| it.map(|v| v * v).sum::<f64>().sqrt();
    let diff = norm(&mut analytic.data().iter().zip(numeric.data()).map(|(a, b)| a - b));
    let scale = norm(&mut analytic.data().iter().copied()) + norm(&mut numeric.data().iter().copied());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
