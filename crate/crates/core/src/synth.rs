//! Deterministic synthetic images for tests, benchmarks and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::{Pixel, RasterImage};
use crate::model::AestheticScores;

pub const OVERFIT_SIZE: usize = 24;
pub const OVERFIT_COUNT: usize = 8;

/// Eight 24x24 images of smooth random color fields, each with seven labels
/// drawn uniformly from [0.1, 0.9].
pub fn overfit_fixture(seed: u64) -> Vec<(RasterImage, AestheticScores)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..OVERFIT_COUNT)
        .map(|_| {
            let base: [f64; 3] = [rng.random(), rng.random(), rng.random()];
            let freq: [f64; 3] = [rng.random_range(0.5..3.0), rng.random_range(0.5..3.0), rng.random_range(0.5..3.0)];
            let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let n = OVERFIT_SIZE as f64;
            let img = RasterImage::from_fn(OVERFIT_SIZE, OVERFIT_SIZE, |x, y| {
                let (u, v) = (x as f64 / n, y as f64 / n);
                let mut p = [0.0; 3];
                for c in 0..3 {
                    let wave = (std::f64::consts::TAU * freq[c] * (u + v * (c as f64 - 1.0)) + phase).sin();
                    p[c] = 0.5 * base[c] + 0.25 + 0.25 * wave;
                }
                p
            })
            .expect("fixture dimensions are valid");
            let mut labels = [0.0; 7];
            for l in &mut labels {
                *l = rng.random_range(0.1..=0.9);
            }
            let attrs: [f64; 6] = labels[1..].try_into().unwrap();
            (img, AestheticScores::new(labels[0], attrs).unwrap())
        })
        .collect()
}

/// Uniform background with an axis-aligned square blob centered at `(cx, cy)`
/// (fractions of width and height), `side` a fraction of the shorter edge.
pub fn square_blob(
    width: usize,
    height: usize,
    cx: f64,
    cy: f64,
    side: f64,
    background: Pixel,
    blob: Pixel,
) -> RasterImage {
    let half = side * width.min(height) as f64 / 2.0;
    let (px, py) = (cx * width as f64, cy * height as f64);
    RasterImage::from_fn(width, height, |x, y| {
        let (fx, fy) = (x as f64 + 0.5, y as f64 + 0.5);
        if (fx - px).abs() <= half && (fy - py).abs() <= half {
            blob
        } else {
            background
        }
    })
    .expect("blob fixture dimensions are valid")
}

/// Same as [`square_blob`] but with an elliptical blob of semi-axes
/// `(rx, ry)` in fractions of width and height.
pub fn ellipse_blob(
    width: usize,
    height: usize,
    center: (f64, f64),
    radii: (f64, f64),
    background: Pixel,
    blob: Pixel,
) -> RasterImage {
    let (w, h) = (width as f64, height as f64);
    RasterImage::from_fn(width, height, |x, y| {
        let u = ((x as f64 + 0.5) / w - center.0) / radii.0;
        let v = ((y as f64 + 0.5) / h - center.1) / radii.1;
        if u * u + v * v <= 1.0 {
            blob
        } else {
            background
        }
    })
    .expect("blob fixture dimensions are valid")
}

pub fn constant(width: usize, height: usize, value: f64) -> RasterImage {
    RasterImage::filled(width, height, [value; 3]).expect("valid dimensions")
}
