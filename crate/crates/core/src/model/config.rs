use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::image::ColorSpace;
use crate::nn::spp::{spp_output_len, DEFAULT_LEVELS};

/// Stride of the stem convolution.
pub const STEM_STRIDE: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadsMode {
    /// Overall and attribute heads both contribute to the loss.
    Both,
    /// Only the overall score is trained (datasets without attribute labels).
    OverallOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub out_channels: usize,
    pub stride: usize,
}

/// Architecture and training hyperparameters. Serialized into checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetworkConfig {
    pub colorspace: ColorSpace,
    pub stem_channels: usize,
    pub blocks: Vec<BlockSpec>,
    pub spp_levels: Vec<usize>,
    pub shared_width: usize,
    pub head_width: usize,
    pub loss_weight_lambda: f64,
    pub heads_mode: HeadsMode,
    pub seed: u64,
    pub lr: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub split_ratio: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            colorspace: ColorSpace::Hsv,
            stem_channels: 16,
            blocks: vec![
                BlockSpec { out_channels: 16, stride: 1 },
                BlockSpec { out_channels: 32, stride: 2 },
                BlockSpec { out_channels: 32, stride: 1 },
            ],
            spp_levels: DEFAULT_LEVELS.to_vec(),
            shared_width: 128,
            head_width: 64,
            loss_weight_lambda: 6.0,
            heads_mode: HeadsMode::Both,
            seed: 0,
            lr: 0.001,
            momentum: 0.9,
            epochs: 100,
            split_ratio: 0.9,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if !(self.loss_weight_lambda > 1.0 && self.loss_weight_lambda.is_finite()) {
            return bad(format!("lambda must be > 1, got {}", self.loss_weight_lambda));
        }
        if self.stem_channels == 0 || self.shared_width == 0 || self.head_width == 0 {
            return bad("layer widths must be positive".into());
        }
        if self.blocks.iter().any(|b| b.out_channels == 0 || b.stride == 0) {
            return bad("residual blocks need positive width and stride".into());
        }
        if self.spp_levels.is_empty() || self.spp_levels.contains(&0) {
            return bad(format!("invalid pyramid levels {:?}", self.spp_levels));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be > 0, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad(format!("momentum must be in [0,1), got {}", self.momentum));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad(format!("split ratio must be in (0,1), got {}", self.split_ratio));
        }
        Ok(())
    }

    pub fn trunk_out_channels(&self) -> usize {
        self.blocks.last().map_or(self.stem_channels, |b| b.out_channels)
    }

    pub fn total_stride(&self) -> usize {
        STEM_STRIDE * self.blocks.iter().map(|b| b.stride).product::<usize>()
    }

    /// Input length of the first shared dense layer.
    pub fn shared_input_len(&self) -> usize {
        spp_output_len(self.trunk_out_channels(), &self.spp_levels)
    }

    /// Smallest accepted image side: the trunk output must cover the largest
    /// pyramid level.
    pub fn min_input_side(&self) -> usize {
        self.total_stride() * self.spp_levels.iter().copied().max().unwrap_or(1)
    }
}
