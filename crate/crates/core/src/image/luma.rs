use serde::Serialize;

use super::{ImageError, RasterImage};

/// Luma below this counts as clipped to black.
pub const CLIP_LOW: f64 = 0.05;
/// Luma above this counts as clipped to white.
pub const CLIP_HIGH: f64 = 0.95;
pub const HISTOGRAM_BINS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LuminanceStats {
    pub mean: f64,
    pub stddev: f64,
    pub clipped_low_frac: f64,
    pub clipped_high_frac: f64,
    pub histogram: Vec<u64>,
}

pub fn luma_stats(img: &RasterImage) -> Result<LuminanceStats, ImageError> {
    let luma = img.luma()?;
    Ok(stats_of_luma(&luma))
}

pub(crate) fn stats_of_luma(luma: &[f64]) -> LuminanceStats {
    let n = luma.len() as f64;
    let mean = luma.iter().sum::<f64>() / n;
    let var = luma.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / n;
    let mut histogram = vec![0u64; HISTOGRAM_BINS];
    let mut low = 0usize;
    let mut high = 0usize;
    for &l in luma {
        let bin = ((l * HISTOGRAM_BINS as f64) as usize).min(HISTOGRAM_BINS - 1);
        histogram[bin] += 1;
        if l < CLIP_LOW {
            low += 1;
        }
        if l > CLIP_HIGH {
            high += 1;
        }
    }
    LuminanceStats {
        mean: mean.clamp(0.0, 1.0),
        stddev: var.sqrt(),
        clipped_low_frac: low as f64 / n,
        clipped_high_frac: high as f64 / n,
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::ColorSpace;
    use proptest::prelude::*;

    #[test]
    fn constant_gray() {
        let s = luma_stats(&RasterImage::filled(4, 3, [0.5; 3]).unwrap()).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-12);
        assert!(s.stddev < 1e-12);
        assert_eq!(s.clipped_low_frac, 0.0);
        assert_eq!(s.clipped_high_frac, 0.0);
        assert_eq!(s.histogram[127] + s.histogram[128], 12);
    }

    #[test]
    fn constant_white_is_clipped() {
        let s = luma_stats(&RasterImage::filled(2, 2, [1.0; 3]).unwrap()).unwrap();
        assert_eq!(s.clipped_high_frac, 1.0);
        assert_eq!(s.histogram[255], 4);
    }

    #[test]
    fn black_and_white_pair() {
        let img =
            RasterImage::new(2, 1, ColorSpace::Srgb, vec![[0.0; 3], [1.0; 3]]).unwrap();
        let s = luma_stats(&img).unwrap();
        assert!((s.mean - 0.5).abs() < 1e-12);
        assert_eq!(s.clipped_low_frac, 0.5);
        assert_eq!(s.clipped_high_frac, 0.5);
        assert!((s.stddev - 0.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn histogram_counts_every_pixel(
            w in 1usize..12, h in 1usize..12,
            seed in proptest::collection::vec(0.0f64..=1.0, 432)
        ) {
            let img = RasterImage::from_fn(w, h, |x, y| {
                let i = (y * w + x) * 3;
                [seed[i], seed[i + 1], seed[i + 2]]
            }).unwrap();
            let s = luma_stats(&img).unwrap();
            prop_assert_eq!(s.histogram.iter().sum::<u64>(), (w * h) as u64);
            prop_assert!((0.0..=1.0).contains(&s.clipped_low_frac));
            prop_assert!((0.0..=1.0).contains(&s.clipped_high_frac));
            prop_assert!((0.0..=1.0).contains(&s.mean));
        }
    }
}
