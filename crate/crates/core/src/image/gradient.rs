use super::{ImageError, RasterImage};

/// Per-pixel Sobel gradient magnitude of luma.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientMap {
    pub width: usize,
    pub height: usize,
    pub magnitude: Vec<f64>,
}

impl GradientMap {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.magnitude[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.magnitude.iter().copied().fold(0.0, f64::max)
    }
}

/// 3x3 Sobel on luma with replicated borders.
pub fn sobel_magnitude(img: &RasterImage) -> Result<GradientMap, ImageError> {
    let luma = img.luma()?;
    img.require_min_size(3, 3)?;
    Ok(sobel_of_luma(&luma, img.width(), img.height()))
}

pub(crate) fn sobel_of_luma(luma: &[f64], width: usize, height: usize) -> GradientMap {
    let at = |x: isize, y: isize| {
        let cx = x.clamp(0, width as isize - 1) as usize;
        let cy = y.clamp(0, height as isize - 1) as usize;
        luma[cy * width + cx]
    };
    let mut magnitude = Vec::with_capacity(width * height);
    for y in 0..height as isize {
        for x in 0..width as isize {
            // (a + c) + 2b keeps the result bit-exact under mirroring
            let gx = ((at(x + 1, y - 1) + at(x + 1, y + 1)) + 2.0 * at(x + 1, y))
                - ((at(x - 1, y - 1) + at(x - 1, y + 1)) + 2.0 * at(x - 1, y));
            let gy = ((at(x - 1, y + 1) + at(x + 1, y + 1)) + 2.0 * at(x, y + 1))
                - ((at(x - 1, y - 1) + at(x + 1, y - 1)) + 2.0 * at(x, y - 1));
            magnitude.push((gx * gx + gy * gy).sqrt());
        }
    }
    GradientMap {
        width,
        height,
        magnitude,
    }
}
