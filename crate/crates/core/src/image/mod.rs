//! Raster images, color-space conversion and the low-level statistics the
//! scoring and guidance layers are built on.

mod codec;
mod color;
mod gradient;
mod luma;
mod resample;

pub use codec::{decode, encode_png, encode_ppm, load};
pub use color::{hsv_to_rgb, rgb_to_hsv, rgb_to_lab};
pub use gradient::{sobel_magnitude, GradientMap};
pub use luma::{luma_stats, LuminanceStats, CLIP_HIGH, CLIP_LOW, HISTOGRAM_BINS};
pub use resample::resample_bilinear;
pub(crate) use gradient::sobel_of_luma;
pub(crate) use luma::stats_of_luma;

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("invalid colorspace: expected {expected}, found {found}")]
    InvalidColorspace {
        expected: ColorSpace,
        found: ColorSpace,
    },
    #[error("image too small: {width}x{height}, need at least {min_width}x{min_height}")]
    TooSmall {
        width: usize,
        height: usize,
        min_width: usize,
        min_height: usize,
    },
    #[error("invalid dimensions {width}x{height}")]
    InvalidDimensions { width: usize, height: usize },
    #[error("pixel buffer holds {actual} pixels, expected {expected}")]
    PixelCount { expected: usize, actual: usize },
    #[error("pixel ({x}, {y}) channel {channel} = {value} outside {colorspace} range")]
    OutOfRange {
        x: usize,
        y: usize,
        channel: usize,
        value: f64,
        colorspace: ColorSpace,
    },
    #[error("decode error: {0}")]
    Decode(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Tag describing how the three channels of a [`RasterImage`] are to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSpace {
    /// Gamma-encoded sRGB, channels in [0,1].
    Srgb,
    /// Hue in degrees [0,360), saturation and value in [0,1].
    Hsv,
    /// CIELAB (D65), L in [0,100], a and b in [-128,127].
    Lab,
}

impl ColorSpace {
    fn channel_range(self, channel: usize) -> (f64, f64, bool) {
        // (lo, hi, hi_exclusive)
        match (self, channel) {
            (ColorSpace::Srgb, _) => (0.0, 1.0, false),
            (ColorSpace::Hsv, 0) => (0.0, 360.0, true),
            (ColorSpace::Hsv, _) => (0.0, 1.0, false),
            (ColorSpace::Lab, 0) => (0.0, 100.0, false),
            (ColorSpace::Lab, _) => (-128.0, 127.0, false),
        }
    }
}

impl fmt::Display for ColorSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColorSpace::Srgb => "srgb",
            ColorSpace::Hsv => "hsv",
            ColorSpace::Lab => "lab",
        })
    }
}

impl std::str::FromStr for ColorSpace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "srgb" | "rgb" => Ok(ColorSpace::Srgb),
            "hsv" => Ok(ColorSpace::Hsv),
            "lab" => Ok(ColorSpace::Lab),
            other => Err(format!("unknown colorspace '{other}' (expected srgb, hsv or lab)")),
        }
    }
}

pub type Pixel = [f64; 3];

/// A width x height raster of three-channel pixels stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    colorspace: ColorSpace,
    pixels: Vec<Pixel>,
}

impl RasterImage {
    /// Validates dimensions, buffer length and per-channel ranges.
    pub fn new(
        width: usize,
        height: usize,
        colorspace: ColorSpace,
        pixels: Vec<Pixel>,
    ) -> Result<Self, ImageError> {
        if width == 0 || height == 0 {
            return Err(ImageError::InvalidDimensions { width, height });
        }
        if pixels.len() != width * height {
            return Err(ImageError::PixelCount {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        for (i, p) in pixels.iter().enumerate() {
            for (channel, &value) in p.iter().enumerate() {
                let (lo, hi, exclusive) = colorspace.channel_range(channel);
                let above = if exclusive { value >= hi } else { value > hi };
                if !value.is_finite() || value < lo || above {
                    return Err(ImageError::OutOfRange {
                        x: i % width,
                        y: i / width,
                        channel,
                        value,
                        colorspace,
                    });
                }
            }
        }
        Ok(Self {
            width,
            height,
            colorspace,
            pixels,
        })
    }

    /// Builds an sRGB image by evaluating `f(x, y)`; values are clamped to [0,1].
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> Pixel,
    ) -> Result<Self, ImageError> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                let p = f(x, y);
                pixels.push([
                    p[0].clamp(0.0, 1.0),
                    p[1].clamp(0.0, 1.0),
                    p[2].clamp(0.0, 1.0),
                ]);
            }
        }
        Self::new(width, height, ColorSpace::Srgb, pixels)
    }

    pub fn filled(width: usize, height: usize, value: Pixel) -> Result<Self, ImageError> {
        Self::from_fn(width, height, |_, _| value)
    }

    // Conversions produce in-range values by construction.
    pub(crate) fn from_parts(
        width: usize,
        height: usize,
        colorspace: ColorSpace,
        pixels: Vec<Pixel>,
    ) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        Self {
            width,
            height,
            colorspace,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn colorspace(&self) -> ColorSpace {
        self.colorspace
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> Pixel {
        self.pixels[y * self.width + x]
    }

    pub fn require_colorspace(&self, expected: ColorSpace) -> Result<(), ImageError> {
        if self.colorspace == expected {
            Ok(())
        } else {
            Err(ImageError::InvalidColorspace {
                expected,
                found: self.colorspace,
            })
        }
    }

    pub fn require_min_size(&self, min_width: usize, min_height: usize) -> Result<(), ImageError> {
        if self.width < min_width || self.height < min_height {
            Err(ImageError::TooSmall {
                width: self.width,
                height: self.height,
                min_width,
                min_height,
            })
        } else {
            Ok(())
        }
    }

    /// Rec.709 luma on the gamma-encoded channels, row-major.
    pub fn luma(&self) -> Result<Vec<f64>, ImageError> {
        self.require_colorspace(ColorSpace::Srgb)?;
        Ok(self.pixels.iter().map(|p| luma_of(*p)).collect())
    }

    /// Left-right mirror image.
    pub fn mirror_horizontal(&self) -> Self {
        let mut pixels = Vec::with_capacity(self.pixels.len());
        for row in self.pixels.chunks(self.width) {
            pixels.extend(row.iter().rev());
        }
        Self::from_parts(self.width, self.height, self.colorspace, pixels)
    }

    /// Converts to the requested colorspace. Only conversions out of sRGB
    /// (and the identity) are supported.
    pub fn convert(&self, target: ColorSpace) -> Result<Self, ImageError> {
        match (self.colorspace, target) {
            (a, b) if a == b => Ok(self.clone()),
            (ColorSpace::Srgb, ColorSpace::Hsv) => rgb_to_hsv(self),
            (ColorSpace::Srgb, ColorSpace::Lab) => rgb_to_lab(self),
            (ColorSpace::Hsv, ColorSpace::Srgb) => hsv_to_rgb(self),
            (found, _) => Err(ImageError::InvalidColorspace {
                expected: ColorSpace::Srgb,
                found,
            }),
        }
    }
}

pub(crate) fn luma_of(p: Pixel) -> f64 {
    0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2]
}
