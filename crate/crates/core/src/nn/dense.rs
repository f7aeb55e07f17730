use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{NnError, Tensor};

/// Affine layer `y = W x + b`, `W` is `[D_out, D_in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseParams {
    pub weight: Tensor,
    pub bias: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseGrad {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl DenseParams {
    pub fn new(weight: Tensor, bias: Tensor) -> Result<Self, NnError> {
        let p = Self { weight, bias };
        p.dims()?;
        Ok(p)
    }

    pub fn zeros(d_out: usize, d_in: usize) -> Self {
        Self {
            weight: Tensor::zeros(&[d_out, d_in]),
            bias: Tensor::zeros(&[d_out]),
        }
    }

    pub fn he_normal<R: Rng + ?Sized>(d_out: usize, d_in: usize, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, (2.0 / d_in as f64).sqrt()).expect("positive std");
        let mut p = Self::zeros(d_out, d_in);
        for w in p.weight.data_mut() {
            *w = normal.sample(rng);
        }
        p
    }

    /// `(D_out, D_in)`.
    pub fn dims(&self) -> Result<(usize, usize), NnError> {
        match *self.weight.shape() {
            [o, i] if self.bias.shape() == [o] => Ok((o, i)),
            _ => Err(NnError::Shape(format!(
                "dense weight {:?} / bias {:?} are not [D_out, D_in] / [D_out]",
                self.weight.shape(),
                self.bias.shape()
            ))),
        }
    }

    fn check_input(&self, x: &Tensor) -> Result<(usize, usize), NnError> {
        let (o, i) = self.dims()?;
        if x.len() != i {
            return Err(NnError::Shape(format!(
                "dense layer expects {i} inputs, got {}",
                x.len()
            )));
        }
        Ok((o, i))
    }
}

/// Input of any shape is read as a flat vector.
pub fn dense(x: &Tensor, p: &DenseParams) -> Result<Tensor, NnError> {
    let (o, i) = p.check_input(x)?;
    let w = p.weight.data();
    let xs = x.data();
    let out = (0..o)
        .map(|r| {
            let row = &w[r * i..(r + 1) * i];
            p.bias.data()[r] + row.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    Ok(Tensor::from_parts(vec![o], out))
}

/// Returns the input gradient (shaped like `x`) and parameter gradients.
pub fn dense_backward(
    x: &Tensor,
    p: &DenseParams,
    upstream: &Tensor,
) -> Result<(Tensor, DenseGrad), NnError> {
    let (o, i) = p.check_input(x)?;
    if upstream.len() != o {
        return Err(NnError::Shape(format!(
            "dense upstream gradient has {} entries, expected {o}",
            upstream.len()
        )));
    }
    let w = p.weight.data();
    let xs = x.data();
    let g = upstream.data();
    let mut gx = vec![0.0; i];
    let mut gw = vec![0.0; o * i];
    for r in 0..o {
        let gr = g[r];
        let row = &w[r * i..(r + 1) * i];
        let grow = &mut gw[r * i..(r + 1) * i];
        for c in 0..i {
            gx[c] += row[c] * gr;
            grow[c] = gr * xs[c];
        }
    }
    Ok((
        Tensor::from_parts(x.shape().to_vec(), gx),
        DenseGrad {
            weight: Tensor::from_parts(vec![o, i], gw),
            bias: Tensor::from_parts(vec![o], g.to_vec()),
        },
    ))
}
