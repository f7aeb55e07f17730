use super::{ColorSpace, ImageError, Pixel, RasterImage};

// sRGB primaries to XYZ, D65.
const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

/// Hexcone conversion. Achromatic pixels get hue 0.
pub fn rgb_to_hsv(img: &RasterImage) -> Result<RasterImage, ImageError> {
    img.require_colorspace(ColorSpace::Srgb)?;
    let pixels = img.pixels().iter().map(|&p| hsv_of(p)).collect();
    Ok(RasterImage::from_parts(
        img.width(),
        img.height(),
        ColorSpace::Hsv,
        pixels,
    ))
}

pub fn hsv_to_rgb(img: &RasterImage) -> Result<RasterImage, ImageError> {
    img.require_colorspace(ColorSpace::Hsv)?;
    let pixels = img.pixels().iter().map(|&p| rgb_of_hsv(p)).collect();
    Ok(RasterImage::from_parts(
        img.width(),
        img.height(),
        ColorSpace::Srgb,
        pixels,
    ))
}

/// sRGB -> linear light -> XYZ (D65) -> CIELAB.
pub fn rgb_to_lab(img: &RasterImage) -> Result<RasterImage, ImageError> {
    img.require_colorspace(ColorSpace::Srgb)?;
    let pixels = img.pixels().iter().map(|&p| lab_of(p)).collect();
    Ok(RasterImage::from_parts(
        img.width(),
        img.height(),
        ColorSpace::Lab,
        pixels,
    ))
}

pub(crate) fn hsv_of([r, g, b]: Pixel) -> Pixel {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let hue = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    // rem_euclid can round up to exactly 6 for tiny negative ratios
    let hue = if hue >= 360.0 { hue - 360.0 } else { hue };
    let saturation = if max == 0.0 { 0.0 } else { delta / max };
    [hue, saturation, max]
}

pub(crate) fn rgb_of_hsv([h, s, v]: Pixel) -> Pixel {
    let c = v * s;
    let sector = h / 60.0;
    let x = c * (1.0 - (sector.rem_euclid(2.0) - 1.0).abs());
    let m = v - c;
    let (r, g, b) = match sector as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    [
        (r + m).clamp(0.0, 1.0),
        (g + m).clamp(0.0, 1.0),
        (b + m).clamp(0.0, 1.0),
    ]
}

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

fn xyz_of(lin: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (row, o) in SRGB_TO_XYZ.iter().zip(out.iter_mut()) {
        *o = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    out
}

pub(crate) fn lab_of(p: Pixel) -> Pixel {
    // Reference white is the matrix image of (1,1,1) so sRGB white lands on
    // L=100, a=b=0 without rounding drift from the published white point.
    let white = xyz_of([1.0, 1.0, 1.0]);
    let xyz = xyz_of([
        srgb_to_linear(p[0]),
        srgb_to_linear(p[1]),
        srgb_to_linear(p[2]),
    ]);
    let fx = lab_f(xyz[0] / white[0]);
    let fy = lab_f(xyz[1] / white[1]);
    let fz = lab_f(xyz[2] / white[2]);
    [
        (116.0 * fy - 16.0).clamp(0.0, 100.0),
        (500.0 * (fx - fy)).clamp(-128.0, 127.0),
        (200.0 * (fy - fz)).clamp(-128.0, 127.0),
    ]
}
