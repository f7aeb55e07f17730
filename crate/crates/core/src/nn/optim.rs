use super::{NnError, Tensor};

/// Gradients laid out in the same order as a model's parameter list.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientStore {
    tensors: Vec<Tensor>,
}

impl GradientStore {
    pub fn zeros_like<'a>(params: impl IntoIterator<Item = &'a Tensor>) -> Self {
        Self {
            tensors: params.into_iter().map(Tensor::zeros_like).collect(),
        }
    }

    pub fn reset(&mut self) {
        for t in &mut self.tensors {
            t.data_mut().fill(0.0);
        }
    }

    /// Adds `grads` (in parameter order) to the stored totals.
    pub fn accumulate(&mut self, grads: &[Tensor]) -> Result<(), NnError> {
        if grads.len() != self.tensors.len() {
            return Err(NnError::Shape(format!(
                "gradient list has {} tensors, store has {}",
                grads.len(),
                self.tensors.len()
            )));
        }
        for (acc, g) in self.tensors.iter_mut().zip(grads) {
            acc.add_assign(g)?;
        }
        Ok(())
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }
}

/// Classic momentum SGD: `v <- momentum * v - lr * g; w <- w + v`.
#[derive(Debug, Clone)]
pub struct Sgd {
    lr: f64,
    momentum: f64,
    velocity: Vec<Tensor>,
}

impl Sgd {
    pub fn new(lr: f64, momentum: f64) -> Result<Self, NnError> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(NnError::InvalidHyperparameter(format!("lr must be > 0, got {lr}")));
        }
        if !(0.0..1.0).contains(&momentum) {
            return Err(NnError::InvalidHyperparameter(format!(
                "momentum must be in [0, 1), got {momentum}"
            )));
        }
        Ok(Self {
            lr,
            momentum,
            velocity: Vec::new(),
        })
    }

    /// Leaves the parameters untouched if any gradient is non-finite.
    pub fn step(&mut self, params: Vec<&mut Tensor>, grads: &GradientStore) -> Result<(), NnError> {
        if params.len() != grads.len() {
            return Err(NnError::Shape(format!(
                "{} parameters but {} gradients",
                params.len(),
                grads.len()
            )));
        }
        for (p, g) in params.iter().zip(grads.tensors()) {
            p.same_shape(g, "sgd gradient")?;
        }
        if grads.tensors().iter().any(|g| !g.is_finite()) {
            return Err(NnError::Diverged);
        }
        if self.velocity.is_empty() {
            self.velocity = grads.tensors().iter().map(Tensor::zeros_like).collect();
        }
        for ((p, g), v) in params.into_iter().zip(grads.tensors()).zip(&mut self.velocity) {
            for ((w, &gv), vv) in p.data_mut().iter_mut().zip(g.data()).zip(v.data_mut()) {
                *vv = self.momentum * *vv - self.lr * gv;
                *w += *vv;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Tensor {
        Tensor::new(vec![1], vec![v]).unwrap()
    }

    fn store(v: f64) -> GradientStore {
        let mut s = GradientStore::zeros_like([&scalar(0.0)]);
        s.accumulate(&[scalar(v)]).unwrap();
        s
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut w = Tensor::new(vec![3], vec![1.0, -2.0, 3.0]).unwrap();
        let before = w.clone();
        let g = GradientStore::zeros_like([&w]);
        Sgd::new(0.1, 0.9).unwrap().step(vec![&mut w], &g).unwrap();
        assert_eq!(w, before);
    }

    #[test]
    fn plain_step() {
        let mut w = scalar(1.0);
        Sgd::new(0.5, 0.0).unwrap().step(vec![&mut w], &store(0.25)).unwrap();
        assert_eq!(w.data(), [1.0 - 0.5 * 0.25]);
    }

    #[test]
    fn momentum_recurrence() {
        let mut w = scalar(0.0);
        let mut sgd = Sgd::new(0.1, 0.9).unwrap();
        sgd.step(vec![&mut w], &store(1.0)).unwrap();
        assert!((w.data()[0] + 0.1).abs() < 1e-15);
        sgd.step(vec![&mut w], &store(1.0)).unwrap();
        assert!((w.data()[0] + 0.29).abs() < 1e-15);
    }

    #[test]
    fn non_finite_gradient_diverges() {
        let mut w = scalar(1.0);
        let mut g = GradientStore::zeros_like([&w]);
        g.tensors[0].data_mut()[0] = f64::INFINITY;
        assert!(matches!(
            Sgd::new(0.1, 0.0).unwrap().step(vec![&mut w], &g),
            Err(NnError::Diverged)
        ));
        assert_eq!(w.data(), [1.0]);
    }

    #[test]
    fn rejects_bad_hyperparameters() {
        assert!(Sgd::new(0.0, 0.5).is_err());
        assert!(Sgd::new(0.1, 1.0).is_err());
        assert!(Sgd::new(0.1, -0.1).is_err());
    }

    #[test]
    fn store_reset_and_accumulate() {
        let mut s = store(2.0);
        s.accumulate(&[scalar(1.0)]).unwrap();
        assert_eq!(s.tensors()[0].data(), [3.0]);
        s.reset();
        assert_eq!(s.tensors()[0].data(), [0.0]);
        assert!(s.accumulate(&[]).is_err());
    }
}
