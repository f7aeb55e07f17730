//! Residual trunk -> spatial pyramid pooling -> shared dense layer -> two heads.
//!
//! ```text
//! image [3,H,W]
//!   stem conv 3x3 /2 + ReLU
//!   residual blocks
//!   SPP (4x4, 2x2, 1x1)            -> [C * 21]
//!   shared dense + ReLU            -> [128]
//!   ├─ overall head: dense+ReLU -> dense -> logistic      -> 1
//!   └─ attribute head: dense+ReLU -> dense -> logistic    -> 6
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{loss::loss_gradient, AestheticScores, HeadsMode, ModelError, NetworkConfig};
use crate::image::{ColorSpace, ImageError, RasterImage};
use crate::nn::{
    conv2d, conv2d_backward, dense, dense_backward, logistic, logistic_backward, relu,
    relu_backward, spp_backward, spp_pool, Checkpoint, ConvParams, DenseParams, ResidualBlock,
    ResidualCache, Tensor,
};

/// What the network consumes: a normalized image, or a feature map that
/// stands in for the trunk output (precomputed by an external extractor).
#[derive(Debug, Clone, PartialEq)]
pub enum ModelInput {
    Image(Tensor),
    Features(Tensor),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AestheticNet {
    pub config: NetworkConfig,
    pub stem: ConvParams,
    pub blocks: Vec<ResidualBlock>,
    pub shared: DenseParams,
    pub overall_hidden: DenseParams,
    pub overall_out: DenseParams,
    pub attribute_hidden: DenseParams,
    pub attribute_out: DenseParams,
}

#[derive(Debug, Clone)]
struct TrunkCache {
    input: Tensor,
    stem_pre: Tensor,
    blocks: Vec<ResidualCache>,
}

#[derive(Debug, Clone)]
struct HeadCache {
    hidden_pre: Tensor,
    hidden_act: Tensor,
    output: Tensor,
}

/// Intermediate activations retained by [`AestheticNet::forward_cached`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    trunk: Option<TrunkCache>,
    features: Tensor,
    pooled: Tensor,
    shared_pre: Tensor,
    shared_act: Tensor,
    overall: HeadCache,
    attributes: HeadCache,
}

impl ForwardCache {
    pub fn scores(&self) -> AestheticScores {
        scores_from_outputs(&self.overall.output, &self.attributes.output)
    }
}

fn scores_from_outputs(overall: &Tensor, attributes: &Tensor) -> AestheticScores {
    let mut attrs = [0.0; 6];
    attrs.copy_from_slice(attributes.data());
    AestheticScores::new(overall.data()[0], attrs).expect("logistic outputs lie in [0,1]")
}

/// Scales each channel of the config colorspace into roughly [0,1] and lays the
/// image out as `[3, H, W]`.
pub fn image_tensor(img: &RasterImage, colorspace: ColorSpace) -> Result<Tensor, ModelError> {
    let converted = match img.colorspace() {
        c if c == colorspace => img.clone(),
        ColorSpace::Srgb => img.convert(colorspace)?,
        found => {
            return Err(ImageError::InvalidColorspace {
                expected: colorspace,
                found,
            }
            .into())
        }
    };
    let (w, h) = (converted.width(), converted.height());
    let scale: fn([f64; 3]) -> [f64; 3] = match colorspace {
        ColorSpace::Srgb => |p| p,
        ColorSpace::Hsv => |p| [p[0] / 360.0, p[1], p[2]],
        ColorSpace::Lab => |p| [p[0] / 100.0, (p[1] + 128.0) / 255.0, (p[2] + 128.0) / 255.0],
    };
    let mut data = vec![0.0; 3 * w * h];
    for (i, &p) in converted.pixels().iter().enumerate() {
        let s = scale(p);
        for c in 0..3 {
            data[c * w * h + i] = s[c];
        }
    }
    Ok(Tensor::new(vec![3, h, w], data)?)
}

impl AestheticNet {
    /// He-normal initialization from `config.seed`; biases start at zero.
    pub fn init(config: NetworkConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let stem = ConvParams::he_normal(config.stem_channels, 3, 3, super::config::STEM_STRIDE, 1, &mut rng);
        let mut blocks = Vec::with_capacity(config.blocks.len());
        let mut c_in = config.stem_channels;
        for spec in &config.blocks {
            blocks.push(ResidualBlock::he_normal(c_in, spec.out_channels, spec.stride, &mut rng));
            c_in = spec.out_channels;
        }
        let shared = DenseParams::he_normal(config.shared_width, config.shared_input_len(), &mut rng);
        let overall_hidden = DenseParams::he_normal(config.head_width, config.shared_width, &mut rng);
        let overall_out = DenseParams::he_normal(1, config.head_width, &mut rng);
        let attribute_hidden = DenseParams::he_normal(config.head_width, config.shared_width, &mut rng);
        let attribute_out = DenseParams::he_normal(6, config.head_width, &mut rng);
        Ok(Self {
            config,
            stem,
            blocks,
            shared,
            overall_hidden,
            overall_out,
            attribute_hidden,
            attribute_out,
        })
    }

    fn dense_layers(&self) -> [&DenseParams; 5] {
        [
            &self.shared,
            &self.overall_hidden,
            &self.overall_out,
            &self.attribute_hidden,
            &self.attribute_out,
        ]
    }

    /// Fixed parameter order shared by gradients and checkpoints.
    pub fn parameters(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.stem.weight, &self.stem.bias];
        for b in &self.blocks {
            out.extend(b.parameters());
        }
        for d in self.dense_layers() {
            out.push(&d.weight);
            out.push(&d.bias);
        }
        out
    }

    pub fn parameters_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![&mut self.stem.weight, &mut self.stem.bias];
        for b in &mut self.blocks {
            out.extend(b.parameters_mut());
        }
        for d in [
            &mut self.shared,
            &mut self.overall_hidden,
            &mut self.overall_out,
            &mut self.attribute_hidden,
            &mut self.attribute_out,
        ] {
            out.push(&mut d.weight);
            out.push(&mut d.bias);
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|t| t.len()).sum()
    }

    pub fn prepare(&self, img: &RasterImage) -> Result<ModelInput, ModelError> {
        let min = self.config.min_input_side();
        img.require_min_size(min, min)?;
        Ok(ModelInput::Image(image_tensor(img, self.config.colorspace)?))
    }

    /// Scores an image at its original size.
    pub fn forward_score(&self, img: &RasterImage) -> Result<AestheticScores, ModelError> {
        let input = self.prepare(img)?;
        Ok(self.forward_cached(&input)?.scores())
    }

    pub fn forward(&self, input: &ModelInput) -> Result<AestheticScores, ModelError> {
        Ok(self.forward_cached(input)?.scores())
    }

    pub fn forward_cached(&self, input: &ModelInput) -> Result<ForwardCache, ModelError> {
        let (trunk, features) = match input {
            ModelInput::Image(x) => {
                let stem_pre = conv2d(x, &self.stem)?;
                let mut act = relu(&stem_pre);
                let mut caches = Vec::with_capacity(self.blocks.len());
                for b in &self.blocks {
                    let (out, cache) = b.forward_cached(&act)?;
                    caches.push(cache);
                    act = out;
                }
                (
                    Some(TrunkCache {
                        input: x.clone(),
                        stem_pre,
                        blocks: caches,
                    }),
                    act,
                )
            }
            ModelInput::Features(f) => {
                let (c, _, _) = f.dims3()?;
                if c != self.config.trunk_out_channels() {
                    return Err(ModelError::InvalidConfig(format!(
                        "feature map has {c} channels, the network expects {}",
                        self.config.trunk_out_channels()
                    )));
                }
                (None, f.clone())
            }
        };
        let pooled = spp_pool(&features, &self.config.spp_levels)?;
        let shared_pre = dense(&pooled, &self.shared)?;
        let shared_act = relu(&shared_pre);
        let overall = head_forward(&shared_act, &self.overall_hidden, &self.overall_out)?;
        let attributes = head_forward(&shared_act, &self.attribute_hidden, &self.attribute_out)?;
        Ok(ForwardCache {
            trunk,
            features,
            pooled,
            shared_pre,
            shared_act,
            overall,
            attributes,
        })
    }

    /// Multi-task loss against `target` and its gradient for every parameter,
    /// in [`parameters`](Self::parameters) order. Trunk gradients are zero for
    /// feature-map inputs.
    pub fn loss_and_gradients(
        &self,
        input: &ModelInput,
        target: &AestheticScores,
    ) -> Result<(f64, Vec<Tensor>), ModelError> {
        let cache = self.forward_cached(input)?;
        let pred = cache.scores();
        let lambda = self.config.loss_weight_lambda;
        let mode = self.config.heads_mode;
        let loss = super::multi_task_loss(&pred, target, lambda, mode);
        let (g_overall, g_attrs) = loss_gradient(&pred, target, lambda, mode);

        let g_overall = Tensor::new(vec![1], vec![g_overall])?;
        let g_attrs = Tensor::new(vec![6], g_attrs.to_vec())?;
        let (g_shared_a, ov_hidden, ov_out) =
            head_backward(&cache.shared_act, &self.overall_hidden, &self.overall_out, &cache.overall, &g_overall)?;
        let (g_shared_b, at_hidden, at_out) = head_backward(
            &cache.shared_act,
            &self.attribute_hidden,
            &self.attribute_out,
            &cache.attributes,
            &g_attrs,
        )?;
        let g_shared_act = g_shared_a.add(&g_shared_b)?;
        let g_shared_pre = relu_backward(&cache.shared_pre, &g_shared_act)?;
        let (g_pooled, shared) = dense_backward(&cache.pooled, &self.shared, &g_shared_pre)?;
        let g_features = spp_backward(&cache.features, &self.config.spp_levels, &g_pooled)?;

        let mut grads = Vec::new();
        match &cache.trunk {
            Some(trunk) => {
                let mut g = g_features;
                let mut block_grads = Vec::with_capacity(self.blocks.len());
                for (b, c) in self.blocks.iter().zip(&trunk.blocks).rev() {
                    let (g_in, bg) = b.backward(c, &g)?;
                    block_grads.push(bg);
                    g = g_in;
                }
                let g_stem = relu_backward(&trunk.stem_pre, &g)?;
                let (_, stem) = conv2d_backward(&trunk.input, &self.stem, &g_stem)?;
                grads.push(stem.weight);
                grads.push(stem.bias);
                for bg in block_grads.into_iter().rev() {
                    grads.extend(bg.into_tensors());
                }
            }
            None => {
                grads.push(Tensor::zeros_like(&self.stem.weight));
                grads.push(Tensor::zeros_like(&self.stem.bias));
                for b in &self.blocks {
                    grads.extend(b.parameters().into_iter().map(Tensor::zeros_like));
                }
            }
        }
        for g in [shared, ov_hidden, ov_out, at_hidden, at_out] {
            grads.push(g.weight);
            grads.push(g.bias);
        }
        Ok((loss, grads))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            meta: serde_json::to_string(&self.config).expect("config serializes"),
            tensors: self.parameters().into_iter().cloned().collect(),
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self, ModelError> {
        let config: NetworkConfig = serde_json::from_str(&ck.meta)
            .map_err(|e| ModelError::Checkpoint(format!("bad config echo: {e}")))?;
        let mut net = Self::init(config)?;
        let mut params = net.parameters_mut();
        if params.len() != ck.tensors.len() {
            return Err(ModelError::Checkpoint(format!(
                "checkpoint holds {} tensors, architecture needs {}",
                ck.tensors.len(),
                params.len()
            )));
        }
        for (i, (p, t)) in params.iter_mut().zip(&ck.tensors).enumerate() {
            if p.shape() != t.shape() {
                return Err(ModelError::Checkpoint(format!(
                    "tensor {i}: shape {:?}, expected {:?}",
                    t.shape(),
                    p.shape()
                )));
            }
            **p = t.clone();
        }
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<(), ModelError> {
        Ok(self.to_checkpoint().save(path)?)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ModelError> {
        Self::from_checkpoint(&Checkpoint::load(path)?)
    }
}

fn head_forward(x: &Tensor, hidden: &DenseParams, out: &DenseParams) -> Result<HeadCache, ModelError> {
    let hidden_pre = dense(x, hidden)?;
    let hidden_act = relu(&hidden_pre);
    let output = logistic(&dense(&hidden_act, out)?);
    Ok(HeadCache {
        hidden_pre,
        hidden_act,
        output,
    })
}

fn head_backward(
    x: &Tensor,
    hidden: &DenseParams,
    out: &DenseParams,
    cache: &HeadCache,
    upstream: &Tensor,
) -> Result<(Tensor, crate::nn::DenseGrad, crate::nn::DenseGrad), ModelError> {
    let g_logit = logistic_backward(&cache.output, upstream)?;
    let (g_act, out_grad) = dense_backward(&cache.hidden_act, out, &g_logit)?;
    let g_pre = relu_backward(&cache.hidden_pre, &g_act)?;
    let (g_x, hidden_grad) = dense_backward(x, hidden, &g_pre)?;
    Ok((g_x, hidden_grad, out_grad))
}

impl HeadsMode {
    pub fn trains_attributes(self) -> bool {
        matches!(self, HeadsMode::Both)
    }
}
