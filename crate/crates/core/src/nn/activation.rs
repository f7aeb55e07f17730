use super::{NnError, Tensor};

pub fn relu(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| v.max(0.0)).collect();
    Tensor::from_parts(x.shape().to_vec(), data)
}

/// Subgradient 0 at the kink.
pub fn relu_backward(x: &Tensor, upstream: &Tensor) -> Result<Tensor, NnError> {
    x.same_shape(upstream, "relu_backward")?;
    let data = x
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
        .collect();
    Ok(Tensor::from_parts(x.shape().to_vec(), data))
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn logistic(x: &Tensor) -> Tensor {
    let data = x.data().iter().map(|&v| sigmoid(v)).collect();
    Tensor::from_parts(x.shape().to_vec(), data)
}

/// Takes the forward *output* `y`; dy/dx = y (1 - y).
pub fn logistic_backward(y: &Tensor, upstream: &Tensor) -> Result<Tensor, NnError> {
    y.same_shape(upstream, "logistic_backward")?;
    let data = y
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&s, &g)| g * s * (1.0 - s))
        .collect();
    Ok(Tensor::from_parts(y.shape().to_vec(), data))
}
