use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{NnError, Tensor};

/// Convolution weights `[C_out, C_in, k, k]`, bias `[C_out]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams {
    pub weight: Tensor,
    pub bias: Tensor,
    pub stride: usize,
    pub padding: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrad {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl ConvParams {
    pub fn new(weight: Tensor, bias: Tensor, stride: usize, padding: usize) -> Result<Self, NnError> {
        let p = Self {
            weight,
            bias,
            stride,
            padding,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn zeros(c_out: usize, c_in: usize, kernel: usize, stride: usize, padding: usize) -> Self {
        Self {
            weight: Tensor::zeros(&[c_out, c_in, kernel, kernel]),
            bias: Tensor::zeros(&[c_out]),
            stride,
            padding,
        }
    }

    /// He-normal weights (std = sqrt(2 / fan_in)), zero bias.
    pub fn he_normal<R: Rng + ?Sized>(
        c_out: usize,
        c_in: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        rng: &mut R,
    ) -> Self {
        let fan_in = (c_in * kernel * kernel) as f64;
        let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("positive std");
        let mut p = Self::zeros(c_out, c_in, kernel, stride, padding);
        for w in p.weight.data_mut() {
            *w = normal.sample(rng);
        }
        p
    }

    fn validate(&self) -> Result<(), NnError> {
        match self.weight.shape() {
            &[c_out, _, k, k2] if k == k2 && k > 0 => {
                if self.bias.shape() != [c_out] {
                    return Err(NnError::Shape(format!(
                        "conv bias shape {:?}, expected [{c_out}]",
                        self.bias.shape()
                    )));
                }
            }
            other => {
                return Err(NnError::Shape(format!(
                    "conv weight must be [C_out, C_in, k, k], got {other:?}"
                )))
            }
        }
        if self.stride == 0 {
            return Err(NnError::Shape("conv stride must be positive".into()));
        }
        Ok(())
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn kernel(&self) -> usize {
        self.weight.shape()[2]
    }

    /// Spatial output extent for an input extent, if non-empty.
    pub fn output_extent(&self, len: usize) -> Option<usize> {
        let padded = len + 2 * self.padding;
        if padded < self.kernel() {
            None
        } else {
            Some((padded - self.kernel()) / self.stride + 1)
        }
    }

    fn output_dims(&self, input: &Tensor) -> Result<(usize, usize, usize, usize, usize), NnError> {
        self.validate()?;
        let (c, h, w) = input.dims3()?;
        if c != self.in_channels() {
            return Err(NnError::Shape(format!(
                "conv expects {} input channels, got {c}",
                self.in_channels()
            )));
        }
        match (self.output_extent(h), self.output_extent(w)) {
            (Some(oh), Some(ow)) => Ok((c, h, w, oh, ow)),
            _ => Err(NnError::TooSmall(format!(
                "{h}x{w} input too small for kernel {} with padding {}",
                self.kernel(),
                self.padding
            ))),
        }
    }
}

/// Cross-correlation with zero padding.
pub fn conv2d(input: &Tensor, p: &ConvParams) -> Result<Tensor, NnError> {
    let (c_in, h, w, oh, ow) = p.output_dims(input)?;
    let c_out = p.out_channels();
    let k = p.kernel();
    let (s, pad) = (p.stride, p.padding as isize);
    let x = input.data();
    let wt = p.weight.data();
    let mut out = vec![0.0; c_out * oh * ow];

    for co in 0..c_out {
        let plane = &mut out[co * oh * ow..(co + 1) * oh * ow];
        plane.fill(p.bias.data()[co]);
        for ci in 0..c_in {
            let xin = &x[ci * h * w..(ci + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let wv = wt[((co * c_in + ci) * k + ky) * k + kx];
                    for oy in 0..oh {
                        let iy = (oy * s) as isize + ky as isize - pad;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let row = &xin[iy as usize * w..(iy as usize + 1) * w];
                        let orow = &mut plane[oy * ow..(oy + 1) * ow];
                        for (ox, o) in orow.iter_mut().enumerate() {
                            let ix = (ox * s) as isize + kx as isize - pad;
                            if ix >= 0 && ix < w as isize {
                                *o += wv * row[ix as usize];
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Tensor::from_parts(vec![c_out, oh, ow], out))
}

/// Gradients with respect to the input, weights and bias.
pub fn conv2d_backward(
    input: &Tensor,
    p: &ConvParams,
    upstream: &Tensor,
) -> Result<(Tensor, ConvGrad), NnError> {
    let (c_in, h, w, oh, ow) = p.output_dims(input)?;
    let c_out = p.out_channels();
    if upstream.shape() != [c_out, oh, ow] {
        return Err(NnError::Shape(format!(
            "conv upstream gradient {:?}, expected {:?}",
            upstream.shape(),
            [c_out, oh, ow]
        )));
    }
    let k = p.kernel();
    let (s, pad) = (p.stride, p.padding as isize);
    let x = input.data();
    let g = upstream.data();
    let wt = p.weight.data();
    let mut gx = vec![0.0; c_in * h * w];
    let mut gw = vec![0.0; wt.len()];
    let mut gb = vec![0.0; c_out];

    for co in 0..c_out {
        let gplane = &g[co * oh * ow..(co + 1) * oh * ow];
        gb[co] = gplane.iter().sum();
        for ci in 0..c_in {
            let xin = &x[ci * h * w..(ci + 1) * h * w];
            let gin = &mut gx[ci * h * w..(ci + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let widx = ((co * c_in + ci) * k + ky) * k + kx;
                    let wv = wt[widx];
                    let mut acc = 0.0;
                    for oy in 0..oh {
                        let iy = (oy * s) as isize + ky as isize - pad;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let base = iy as usize * w;
                        for ox in 0..ow {
                            let ix = (ox * s) as isize + kx as isize - pad;
                            if ix >= 0 && ix < w as isize {
                                let gv = gplane[oy * ow + ox];
                                acc += gv * xin[base + ix as usize];
                                gin[base + ix as usize] += wv * gv;
                            }
                        }
                    }
                    gw[widx] += acc;
                }
            }
        }
    }
    Ok((
        Tensor::from_parts(vec![c_in, h, w], gx),
        ConvGrad {
            weight: Tensor::from_parts(p.weight.shape().to_vec(), gw),
            bias: Tensor::from_parts(vec![c_out], gb),
        },
    ))
}
