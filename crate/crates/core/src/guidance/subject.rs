use serde::Serialize;

use super::{GuidanceConfig, GuidanceError};
use crate::image::{resample_bilinear, ColorSpace, RasterImage};

/// Eccentricity reported for degenerate (line-like) saliency.
pub const ECCENTRICITY_CAP: f64 = 1e3;

/// Contrast-plus-edge saliency on the analysis raster.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    /// Luma of the analysis raster, kept for the rule detectors.
    pub luma: Vec<f64>,
}

impl SaliencyMap {
    pub fn at(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectRegion {
    /// `(x0, y0, x1, y1)`, normalized.
    pub bbox: [f64; 4],
    pub centroid: (f64, f64),
    pub area_frac: f64,
    /// Principal axis angle, counter-clockwise from the +x axis with y up.
    pub orientation_deg: f64,
    pub eccentricity: f64,
    pub peaks: Vec<(f64, f64)>,
}

/// Maxima at or below this are rounding noise (e.g. `|l - mean|` on a flat
/// frame) and normalize to an all-zero map.
const NOISE_FLOOR: f64 = 1e-9;

fn normalize(v: &mut [f64]) {
    let m = v.iter().copied().fold(0.0, f64::max);
    for x in v {
        *x = if m > NOISE_FLOOR { *x / m } else { 0.0 };
    }
}

// (a + c) + b sums stay bit-exact when the frame is mirrored.
fn box_blur(v: &[f64], w: usize, h: usize) -> Vec<f64> {
    let at = |buf: &[f64], x: isize, y: isize| {
        buf[y.clamp(0, h as isize - 1) as usize * w + x.clamp(0, w as isize - 1) as usize]
    };
    let mut horiz = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            horiz[y as usize * w + x as usize] = (at(v, x - 1, y) + at(v, x + 1, y)) + at(v, x, y);
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            out[y as usize * w + x as usize] =
                ((at(&horiz, x, y - 1) + at(&horiz, x, y + 1)) + at(&horiz, x, y)) / 9.0;
        }
    }
    out
}

/// Downsamples an sRGB frame and computes its saliency.
pub fn saliency_map(img: &RasterImage, cfg: &GuidanceConfig) -> Result<SaliencyMap, GuidanceError> {
    img.require_colorspace(ColorSpace::Srgb)?;
    img.require_min_size(cfg.min_input_side, cfg.min_input_side)?;
    let small = resample_bilinear(img, cfg.analysis_max_dim);
    let (w, h) = (small.width(), small.height());
    let luma = small.luma()?;
    let mean = luma.iter().sum::<f64>() / luma.len() as f64;
    let mut contrast: Vec<f64> = luma.iter().map(|l| (l - mean).abs()).collect();
    normalize(&mut contrast);
    let mut edges = crate::image::sobel_of_luma(&luma, w, h).magnitude;
    normalize(&mut edges);
    let raw: Vec<f64> = contrast.iter().zip(&edges).map(|(c, e)| 0.5 * c + 0.5 * e).collect();
    Ok(SaliencyMap {
        width: w,
        height: h,
        values: box_blur(&raw, w, h),
        luma,
    })
}

pub fn estimate_subject(img: &RasterImage, cfg: &GuidanceConfig) -> Result<SubjectRegion, GuidanceError> {
    subject_from_saliency(&saliency_map(img, cfg)?, cfg)
}

pub(crate) fn subject_from_saliency(
    map: &SaliencyMap,
    cfg: &GuidanceConfig,
) -> Result<SubjectRegion, GuidanceError> {
    let max = map.max();
    if max <= 0.0 {
        return Err(GuidanceError::NoSubject);
    }
    let threshold = cfg.saliency_threshold * max;
    let (w, h) = (map.width, map.height);
    let (mut x0, mut y0, mut x1, mut y1) = (w, h, 0, 0);
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            let s = map.at(x, y);
            if s >= threshold {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x + 1);
                y1 = y1.max(y + 1);
                sw += s;
                sx += s * (x as f64 + 0.5);
                sy += s * (y as f64 + 0.5);
            }
        }
    }
    let (mx, my) = (sx / sw, sy / sw);
    let (mut cxx, mut cyy, mut cxy) = (0.0, 0.0, 0.0);
    for y in 0..h {
        for x in 0..w {
            let s = map.at(x, y);
            if s >= threshold {
                let dx = x as f64 + 0.5 - mx;
                // y up, so angles read counter-clockwise on screen
                let dy = my - (y as f64 + 0.5);
                cxx += s * dx * dx;
                cyy += s * dy * dy;
                cxy += s * dx * dy;
            }
        }
    }
    let (cxx, cyy, cxy) = (cxx / sw, cyy / sw, cxy / sw);
    let mut orientation = 0.5 * (2.0 * cxy).atan2(cxx - cyy).to_degrees();
    if orientation >= 90.0 {
        orientation -= 180.0;
    }
    let mid = 0.5 * (cxx + cyy);
    let rad = (0.25 * (cxx - cyy) * (cxx - cyy) + cxy * cxy).sqrt();
    let (l_max, l_min) = (mid + rad, mid - rad);
    let eccentricity = if l_min <= 0.0 || l_max / l_min >= ECCENTRICITY_CAP * ECCENTRICITY_CAP {
        ECCENTRICITY_CAP
    } else {
        (l_max / l_min).sqrt().max(1.0)
    };
    let (fw, fh) = (w as f64, h as f64);
    let bbox = [x0 as f64 / fw, y0 as f64 / fh, x1 as f64 / fw, y1 as f64 / fh];
    Ok(SubjectRegion {
        bbox,
        centroid: (mx / fw, my / fh),
        area_frac: (bbox[2] - bbox[0]) * (bbox[3] - bbox[1]),
        orientation_deg: orientation,
        eccentricity,
        peaks: find_peaks(map, threshold, cfg),
    })
}

/// Greedy strongest-first selection of 3x3 local maxima above `threshold`.
fn find_peaks(map: &SaliencyMap, threshold: f64, cfg: &GuidanceConfig) -> Vec<(f64, f64)> {
    let (w, h) = (map.width, map.height);
    let mut candidates = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let s = map.at(x, y);
            if s < threshold {
                continue;
            }
            let is_max = (y.saturating_sub(1)..(y + 2).min(h))
                .all(|ny| (x.saturating_sub(1)..(x + 2).min(w)).all(|nx| map.at(nx, ny) <= s));
            if is_max {
                candidates.push((s, (x as f64 + 0.5) / w as f64, (y as f64 + 0.5) / h as f64));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    for (_, x, y) in candidates {
        if peaks.len() == cfg.max_peaks {
            break;
        }
        if peaks.iter().all(|p| (p.0 - x).hypot(p.1 - y) >= cfg.peak_separation) {
            peaks.push((x, y));
        }
    }
    peaks
}
