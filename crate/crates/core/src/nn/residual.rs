use rand::Rng;

use super::{
    conv2d, conv2d_backward, relu, relu_backward, ConvGrad, ConvParams, NnError, Tensor,
};

/// `ReLU(skip(x) + conv2(ReLU(conv1(x))))`, where `skip` is the identity or a
/// 1x1 projection when the block changes stride or width.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBlock {
    pub conv1: ConvParams,
    pub conv2: ConvParams,
    pub projection: Option<ConvParams>,
}

#[derive(Debug, Clone)]
pub struct ResidualCache {
    input: Tensor,
    branch_pre: Tensor,
    branch_act: Tensor,
    sum: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualGrad {
    pub conv1: ConvGrad,
    pub conv2: ConvGrad,
    pub projection: Option<ConvGrad>,
}

impl ResidualGrad {
    /// Same order as [`ResidualBlock::parameters`].
    pub fn into_tensors(self) -> Vec<Tensor> {
        let mut out = vec![
            self.conv1.weight,
            self.conv1.bias,
            self.conv2.weight,
            self.conv2.bias,
        ];
        if let Some(p) = self.projection {
            out.push(p.weight);
            out.push(p.bias);
        }
        out
    }
}

impl ResidualBlock {
    /// 3x3 convolutions; a projection is added whenever `stride != 1` or the
    /// channel count changes.
    pub fn he_normal<R: Rng + ?Sized>(
        c_in: usize,
        c_out: usize,
        stride: usize,
        rng: &mut R,
    ) -> Self {
        let conv1 = ConvParams::he_normal(c_out, c_in, 3, stride, 1, rng);
        let conv2 = ConvParams::he_normal(c_out, c_out, 3, 1, 1, rng);
        let projection = (stride != 1 || c_in != c_out)
            .then(|| ConvParams::he_normal(c_out, c_in, 1, stride, 0, rng));
        Self {
            conv1,
            conv2,
            projection,
        }
    }

    pub fn zeros(c_in: usize, c_out: usize, stride: usize) -> Self {
        Self {
            conv1: ConvParams::zeros(c_out, c_in, 3, stride, 1),
            conv2: ConvParams::zeros(c_out, c_out, 3, 1, 1),
            projection: (stride != 1 || c_in != c_out)
                .then(|| ConvParams::zeros(c_out, c_in, 1, stride, 0)),
        }
    }

    pub fn out_channels(&self) -> usize {
        self.conv2.out_channels()
    }

    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut out = vec![
            &self.conv1.weight,
            &self.conv1.bias,
            &self.conv2.weight,
            &self.conv2.bias,
        ];
        if let Some(p) = &self.projection {
            out.push(&p.weight);
            out.push(&p.bias);
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![
            &mut self.conv1.weight,
            &mut self.conv1.bias,
            &mut self.conv2.weight,
            &mut self.conv2.bias,
        ];
        if let Some(p) = &mut self.projection {
            out.push(&mut p.weight);
            out.push(&mut p.bias);
        }
        out
    }

    pub fn forward_cached(&self, input: &Tensor) -> Result<(Tensor, ResidualCache), NnError> {
        let branch_pre = conv2d(input, &self.conv1)?;
        let branch_act = relu(&branch_pre);
        let branch = conv2d(&branch_act, &self.conv2)?;
        let skip = match &self.projection {
            Some(p) => conv2d(input, p)?,
            None => input.clone(),
        };
        if skip.shape() != branch.shape() {
            return Err(NnError::Shape(format!(
                "residual branch {:?} does not match skip path {:?}",
                branch.shape(),
                skip.shape()
            )));
        }
        let sum = skip.add(&branch)?;
        let out = relu(&sum);
        Ok((
            out,
            ResidualCache {
                input: input.clone(),
                branch_pre,
                branch_act,
                sum,
            },
        ))
    }

    pub fn backward(
        &self,
        cache: &ResidualCache,
        upstream: &Tensor,
    ) -> Result<(Tensor, ResidualGrad), NnError> {
        let g_sum = relu_backward(&cache.sum, upstream)?;
        let (g_act, conv2) = conv2d_backward(&cache.branch_act, &self.conv2, &g_sum)?;
        let g_pre = relu_backward(&cache.branch_pre, &g_act)?;
        let (mut g_input, conv1) = conv2d_backward(&cache.input, &self.conv1, &g_pre)?;
        let projection = match &self.projection {
            Some(p) => {
                let (g_skip, grad) = conv2d_backward(&cache.input, p, &g_sum)?;
                g_input.add_assign(&g_skip)?;
                Some(grad)
            }
            None => {
                g_input.add_assign(&g_sum)?;
                None
            }
        };
        Ok((
            g_input,
            ResidualGrad {
                conv1,
                conv2,
                projection,
            },
        ))
    }
}

pub fn residual_block(input: &Tensor, block: &ResidualBlock) -> Result<Tensor, NnError> {
    block.forward_cached(input).map(|(out, _)| out)
}
