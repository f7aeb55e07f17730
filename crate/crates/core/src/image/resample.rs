use super::{Pixel, RasterImage};

/// Bilinear downsample so the larger side is at most `max_dim`. Never upsamples.
pub fn resample_bilinear(img: &RasterImage, max_dim: usize) -> RasterImage {
    let max_dim = max_dim.max(1);
    let (w, h) = (img.width(), img.height());
    let longest = w.max(h);
    if longest <= max_dim {
        return img.clone();
    }
    let scale = max_dim as f64 / longest as f64;
    let (nw, nh) = if w >= h {
        (max_dim, ((h as f64 * scale).round() as usize).max(1))
    } else {
        (((w as f64 * scale).round() as usize).max(1), max_dim)
    };
    let sx = w as f64 / nw as f64;
    let sy = h as f64 / nh as f64;

    let mut out = Vec::with_capacity(nw * nh);
    for y in 0..nh {
        let (y0, y1, ty) = sample_coord(y, sy, h);
        for x in 0..nw {
            let (x0, x1, tx) = sample_coord(x, sx, w);
            let top = lerp(img.pixel(x0, y0), img.pixel(x1, y0), tx);
            let bottom = lerp(img.pixel(x0, y1), img.pixel(x1, y1), tx);
            out.push(lerp(top, bottom, ty));
        }
    }
    RasterImage::from_parts(nw, nh, img.colorspace(), out)
}

fn sample_coord(i: usize, scale: f64, len: usize) -> (usize, usize, f64) {
    let src = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
    let i0 = src.floor() as usize;
    let i1 = (i0 + 1).min(len - 1);
    (i0, i1, src - i0 as f64)
}

// a + (b - a) t keeps equal endpoints bit-exact.
fn lerp(a: Pixel, b: Pixel, t: f64) -> Pixel {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn halves_wide_image() {
        let img = RasterImage::filled(100, 50, [0.2, 0.4, 0.6]).unwrap();
        let out = resample_bilinear(&img, 50);
        assert_eq!((out.width(), out.height()), (50, 25));
    }

    #[test]
    fn never_upsamples() {
        let img = RasterImage::from_fn(30, 30, |x, y| [x as f64 / 29.0, y as f64 / 29.0, 0.0])
            .unwrap();
        assert_eq!(resample_bilinear(&img, 64), img);
    }

    #[test]
    fn tall_image_keeps_aspect() {
        let img = RasterImage::filled(40, 400, [0.5; 3]).unwrap();
        let out = resample_bilinear(&img, 100);
        assert_eq!((out.width(), out.height()), (10, 100));
    }

    #[test]
    fn ramp_stays_monotone() {
        let img = RasterImage::from_fn(200, 10, |x, _| [x as f64 / 199.0; 3]).unwrap();
        let out = resample_bilinear(&img, 37);
        for x in 1..out.width() {
            assert!(out.pixel(x, 0)[0] > out.pixel(x - 1, 0)[0]);
        }
    }

    proptest! {
        #[test]
        fn constant_in_constant_out(
            w in 1usize..80, h in 1usize..80, max_dim in 1usize..90, v in 0.0f64..=1.0
        ) {
            let img = RasterImage::filled(w, h, [v, 1.0 - v, v * 0.5]).unwrap();
            let out = resample_bilinear(&img, max_dim);
            prop_assert!(out.width().max(out.height()) == w.max(h).min(max_dim));
            for p in out.pixels() {
                prop_assert_eq!(*p, [v, 1.0 - v, v * 0.5]);
            }
        }
    }
}
