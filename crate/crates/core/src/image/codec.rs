//! PNG and binary PPM (P6, maxval 255) ingestion. Channels map to [0,1] by /255.

use std::io::Cursor;
use std::path::Path;

use super::{ColorSpace, ImageError, Pixel, RasterImage};

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0D, 0x0A, 0x1A, 0x0A];

pub fn load(path: impl AsRef<Path>) -> Result<RasterImage, ImageError> {
    let bytes = std::fs::read(path)?;
    decode(&bytes)
}

/// Sniffs the container from its magic bytes.
pub fn decode(bytes: &[u8]) -> Result<RasterImage, ImageError> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else {
        Err(ImageError::Decode(
            "unrecognized image format (expected PNG or binary PPM)".into(),
        ))
    }
}

fn decode_ppm(bytes: &[u8]) -> Result<RasterImage, ImageError> {
    let mut pos = 2;
    let mut header = [0usize; 3];
    for field in header.iter_mut() {
        // whitespace and comments between tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::Decode("malformed PPM header".into()))?;
    }
    let [width, height, maxval] = header;
    if maxval != 255 {
        return Err(ImageError::Decode(format!(
            "unsupported PPM maxval {maxval} (only 255)"
        )));
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(ImageError::Decode("malformed PPM header".into()));
    }
    pos += 1;
    let body = &bytes[pos..];
    let needed = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| ImageError::Decode("PPM dimensions overflow".into()))?;
    if body.len() < needed {
        return Err(ImageError::Decode(format!(
            "truncated PPM: {} of {needed} bytes",
            body.len()
        )));
    }
    let pixels = body[..needed]
        .chunks_exact(3)
        .map(|c| to_unit([c[0], c[1], c[2]]))
        .collect();
    RasterImage::new(width, height, ColorSpace::Srgb, pixels)
}

fn decode_png(bytes: &[u8]) -> Result<RasterImage, ImageError> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::normalize_to_color8());
    let mut reader = decoder
        .read_info()
        .map_err(|e| ImageError::Decode(e.to_string()))?;
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| ImageError::Decode("PNG too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| ImageError::Decode(e.to_string()))?;
    let (width, height) = (info.width as usize, info.height as usize);
    let channels = info.color_type.samples();
    let mut pixels = Vec::with_capacity(width * height);
    for row in buf.chunks(info.line_size).take(height) {
        for px in row.chunks_exact(channels).take(width) {
            let rgb = match channels {
                1 | 2 => [px[0], px[0], px[0]],
                _ => [px[0], px[1], px[2]],
            };
            pixels.push(to_unit(rgb));
        }
    }
    RasterImage::new(width, height, ColorSpace::Srgb, pixels)
}

fn to_unit(c: [u8; 3]) -> Pixel {
    [
        c[0] as f64 / 255.0,
        c[1] as f64 / 255.0,
        c[2] as f64 / 255.0,
    ]
}

fn quantize(img: &RasterImage) -> Result<Vec<u8>, ImageError> {
    img.require_colorspace(ColorSpace::Srgb)?;
    Ok(img
        .pixels()
        .iter()
        .flat_map(|p| p.map(|c| (c * 255.0).round().clamp(0.0, 255.0) as u8))
        .collect())
}

pub fn encode_ppm(img: &RasterImage) -> Result<Vec<u8>, ImageError> {
    let body = quantize(img)?;
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn encode_png(img: &RasterImage) -> Result<Vec<u8>, ImageError> {
    let body = quantize(img)?;
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, img.width() as u32, img.height() as u32);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| ImageError::Decode(e.to_string()))?;
        writer
            .write_image_data(&body)
            .map_err(|e| ImageError::Decode(e.to_string()))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_fixture_is_bit_exact() {
        let raw = b"P6\n# fixture\n2 1\n255\n\x00\x80\xff\xff\x00\x33";
        let img = decode(raw).unwrap();
        assert_eq!((img.width(), img.height()), (2, 1));
        assert_eq!(img.pixel(0, 0), [0.0, 128.0 / 255.0, 1.0]);
        assert_eq!(img.pixel(1, 0), [1.0, 0.0, 0.2]);
        assert_eq!(encode_ppm(&img).unwrap(), b"P6\n2 1\n255\n\x00\x80\xff\xff\x00\x33");
    }

    #[test]
    fn png_round_trip() {
        let img = RasterImage::from_fn(5, 3, |x, y| {
            [x as f64 / 4.0, y as f64 / 2.0, ((x + y) % 2) as f64]
        })
        .unwrap();
        let bytes = encode_png(&img).unwrap();
        let back = decode(&bytes).unwrap();
        let again = decode(&encode_ppm(&back).unwrap()).unwrap();
        assert_eq!(back, again);
        assert_eq!(back.pixel(4, 2), [1.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_garbage_and_truncation() {
        assert!(matches!(decode(b"GIF89a"), Err(ImageError::Decode(_))));
        assert!(matches!(decode(b"P6 4 4 255\n\x00\x00"), Err(ImageError::Decode(_))));
        assert!(matches!(decode(b"P6 1 1 65535\n\x00\x00\x00"), Err(ImageError::Decode(_))));
        assert!(decode(&PNG_SIGNATURE).is_err());
    }
}
