//! Raster image representation, PNG I/O and image-level metrics.
//!
//! Images are stored as `f64` RGBA with straight (non-premultiplied) alpha,
//! all channels in `[0, 1]`. Metrics (MSE, PSNR) operate on the RGB channels
//! only; transparent targets are expected to be flattened over a background
//! first via [`composite_over_background`].

use std::path::Path;

use crate::error::{Error, Result};

/// An RGB color with channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rgb {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

impl Rgb {
    pub const WHITE: Rgb = Rgb {
        r: 1.0,
        g: 1.0,
        b: 1.0,
    };
    pub const BLACK: Rgb = Rgb {
        r: 0.0,
        g: 0.0,
        b: 0.0,
    };

    pub fn new(r: f64, g: f64, b: f64) -> Self {
        Self { r, g, b }
    }
}

/// An RGBA color with straight alpha, channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Rgba {
    pub r: f64,
    pub g: f64,
    pub b: f64,
    pub a: f64,
}

impl Rgba {
    pub fn new(r: f64, g: f64, b: f64, a: f64) -> Self {
        Self { r, g, b, a }
    }

    pub fn opaque(rgb: Rgb) -> Self {
        Self::new(rgb.r, rgb.g, rgb.b, 1.0)
    }

    pub fn channel(&self, c: usize) -> f64 {
        match c {
            0 => self.r,
            1 => self.g,
            2 => self.b,
            _ => self.a,
        }
    }
}

/// A `width` x `height` RGBA image, row-major, straight alpha, `f64` channels.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    /// Interleaved RGBA, `4 * width * height` values in `[0, 1]`.
    data: Vec<f64>,
}

impl RasterImage {
    /// A uniform image filled with `color`.
    pub fn filled(width: usize, height: usize, color: Rgba) -> Self {
        assert!(width >= 1 && height >= 1, "image must be at least 1x1");
        let mut data = Vec::with_capacity(width * height * 4);
        for _ in 0..width * height {
            data.extend_from_slice(&[color.r, color.g, color.b, color.a]);
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn from_data(width: usize, height: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), width * height * 4, "data length mismatch");
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn idx(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y * self.width + x) * 4
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> Rgba {
        let i = self.idx(x, y);
        Rgba::new(
            self.data[i],
            self.data[i + 1],
            self.data[i + 2],
            self.data[i + 3],
        )
    }

    #[inline]
    pub fn set_pixel(&mut self, x: usize, y: usize, c: Rgba) {
        let i = self.idx(x, y);
        self.data[i] = c.r;
        self.data[i + 1] = c.g;
        self.data[i + 2] = c.b;
        self.data[i + 3] = c.a;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn same_size(&self, other: &RasterImage) -> bool {
        self.width == other.width && self.height == other.height
    }

    fn check_same_size(&self, other: &RasterImage) -> Result<()> {
        if self.same_size(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(
                self.width,
                self.height,
                other.width,
                other.height,
            ))
        }
    }
}

/// Decode a PNG file into a [`RasterImage`].
///
/// 8- and 16-bit inputs are supported; channels are scaled to `[0, 1]` and a
/// missing alpha channel is filled with 1.0. No color management is applied.
pub fn load_png(path: impl AsRef<Path>) -> Result<RasterImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_png_bytes(&bytes)
}

/// Decode PNG data from memory. See [`load_png`].
pub fn load_png_bytes(bytes: &[u8]) -> Result<RasterImage> {
    let decoded = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?;
    // to_rgba16 maps 8-bit samples v to v * 257, so v*257/65535 == v/255
    // exactly and both depths share one conversion.
    let rgba = decoded.to_rgba16();
    let (w, h) = (rgba.width() as usize, rgba.height() as usize);
    let mut data = Vec::with_capacity(w * h * 4);
    for px in rgba.pixels() {
        for &v in &px.0 {
            data.push(v as f64 / 65535.0);
        }
    }
    Ok(RasterImage::from_data(w, h, data))
}

/// Encode an image as 8-bit RGBA PNG. Channels are clamped and rounded.
pub fn save_png(img: &RasterImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_png(img);
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Encode an image as 8-bit RGBA PNG in memory.
pub fn encode_png(img: &RasterImage) -> Vec<u8> {
    let buf: Vec<u8> = img.data.iter().map(|&v| quantize8(v)).collect();
    let rgba =
        image::RgbaImage::from_raw(img.width as u32, img.height as u32, buf).expect("sized buffer");
    let mut out = Vec::new();
    let encoder = image::codecs::png::PngEncoder::new(&mut out);
    image::ImageEncoder::write_image(
        encoder,
        rgba.as_raw(),
        rgba.width(),
        rgba.height(),
        image::ExtendedColorType::Rgba8,
    )
    .expect("in-memory png encode");
    out
}

#[inline]
pub(crate) fn quantize8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Flatten `img` over an opaque background color.
///
/// Per pixel: `out = a * rgb + (1 - a) * bg`, output alpha 1 everywhere.
pub fn composite_over_background(img: &RasterImage, bg: Rgb) -> RasterImage {
    let mut out = RasterImage::filled(img.width, img.height, Rgba::opaque(bg));
    for y in 0..img.height {
        for x in 0..img.width {
            let p = img.pixel(x, y);
            let a = p.a;
            out.set_pixel(
                x,
                y,
                Rgba::new(
                    a * p.r + (1.0 - a) * bg.r,
                    a * p.g + (1.0 - a) * bg.g,
                    a * p.b + (1.0 - a) * bg.b,
                    1.0,
                ),
            );
        }
    }
    out
}

/// Mean squared error over the RGB channels of two same-sized images.
pub fn mse(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    a.check_same_size(b)?;
    let mut sum = 0.0;
    for (pa, pb) in a.data.chunks_exact(4).zip(b.data.chunks_exact(4)) {
        for c in 0..3 {
            let d = pa[c] - pb[c];
            sum += d * d;
        }
    }
    Ok(sum / (a.width * a.height * 3) as f64)
}

/// Peak signal-to-noise ratio in dB, with peak 1.0.
///
/// Identical images yield `f64::INFINITY`, distinguishable from any finite dB.
pub fn psnr(a: &RasterImage, b: &RasterImage) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(psnr_from_mse(m))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn png_bytes(w: u32, h: u32, px: impl Fn(u32, u32) -> [u8; 4]) -> Vec<u8> {
        let img = image::RgbaImage::from_fn(w, h, |x, y| image::Rgba(px(x, y)));
        let mut out = Vec::new();
        let encoder = image::codecs::png::PngEncoder::new(&mut out);
        image::ImageEncoder::write_image(
            encoder,
            img.as_raw(),
            w,
            h,
            image::ExtendedColorType::Rgba8,
        )
        .unwrap();
        out
    }

    #[test]
    fn load_opaque_black_pixel() {
        let img = load_png_bytes(&png_bytes(1, 1, |_, _| [0, 0, 0, 255])).unwrap();
        assert_eq!(img.width(), 1);
        assert_eq!(img.height(), 1);
        assert_eq!(img.pixel(0, 0), Rgba::new(0.0, 0.0, 0.0, 1.0));
    }

    #[test]
    fn load_without_alpha_fills_one() {
        // RGB-only PNG: alpha must come back as exactly 1.0.
        let rgb = image::RgbImage::from_fn(2, 2, |x, y| image::Rgb([(x * 50) as u8, 0, y as u8]));
        let mut bytes = Vec::new();
        let encoder = image::codecs::png::PngEncoder::new(&mut bytes);
        image::ImageEncoder::write_image(
            encoder,
            rgb.as_raw(),
            2,
            2,
            image::ExtendedColorType::Rgb8,
        )
        .unwrap();
        let img = load_png_bytes(&bytes).unwrap();
        for y in 0..2 {
            for x in 0..2 {
                assert_eq!(img.pixel(x, y).a, 1.0);
            }
        }
    }

    #[test]
    fn load_16_bit_gray_midpoint() {
        // 16-bit gray value 32768 must decode to 32768/65535.
        let gray = image::DynamicImage::ImageLuma16(image::ImageBuffer::from_pixel(
            1,
            1,
            image::Luma([32768u16]),
        ));
        let mut bytes = std::io::Cursor::new(Vec::new());
        gray.write_to(&mut bytes, image::ImageFormat::Png).unwrap();
        let img = load_png_bytes(bytes.get_ref()).unwrap();
        assert_relative_eq!(img.pixel(0, 0).r, 32768.0 / 65535.0, epsilon = 1e-12);
        assert!(img.pixel(0, 0).r > 0.5);
    }

    #[test]
    fn composite_examples() {
        let mut img = RasterImage::filled(3, 1, Rgba::new(1.0, 0.0, 0.0, 1.0));
        img.set_pixel(1, 0, Rgba::new(1.0, 0.0, 0.0, 0.0));
        img.set_pixel(2, 0, Rgba::new(1.0, 0.0, 0.0, 0.5));
        let over_white = composite_over_background(&img, Rgb::WHITE);
        assert_eq!(over_white.pixel(0, 0), Rgba::new(1.0, 0.0, 0.0, 1.0));
        assert_eq!(over_white.pixel(1, 0), Rgba::new(1.0, 1.0, 1.0, 1.0));
        let over_blue = composite_over_background(&img, Rgb::new(0.0, 0.0, 1.0));
        assert_eq!(over_blue.pixel(2, 0), Rgba::new(0.5, 0.0, 0.5, 1.0));
    }

    #[test]
    fn mse_examples() {
        let black = RasterImage::filled(1, 1, Rgba::new(0.0, 0.0, 0.0, 1.0));
        let white = RasterImage::filled(1, 1, Rgba::new(1.0, 1.0, 1.0, 1.0));
        assert_eq!(mse(&black, &black).unwrap(), 0.0);
        assert_eq!(mse(&black, &white).unwrap(), 1.0);

        let a = RasterImage::filled(1, 1, Rgba::new(0.5, 0.5, 0.5, 1.0));
        let b = RasterImage::filled(1, 1, Rgba::new(0.25, 0.75, 0.5, 1.0));
        assert_relative_eq!(mse(&a, &b).unwrap(), (0.0625 + 0.0625) / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn mse_dimension_mismatch() {
        let a = RasterImage::filled(2, 2, Rgba::opaque(Rgb::WHITE));
        let b = RasterImage::filled(2, 3, Rgba::opaque(Rgb::WHITE));
        assert!(matches!(mse(&a, &b), Err(Error::DimensionMismatch(..))));
    }

    #[test]
    fn psnr_examples() {
        let a = RasterImage::filled(1, 1, Rgba::opaque(Rgb::BLACK));
        assert!(psnr(&a, &a).unwrap().is_infinite());
        assert_relative_eq!(psnr_from_mse(0.01), 20.0, epsilon = 1e-12);
        // mse = 1/24 -> 10*log10(24)
        assert_relative_eq!(
            psnr_from_mse((0.0625 + 0.0625) / 3.0),
            10.0 * 24.0_f64.log10(),
            epsilon = 1e-12
        );
        assert_relative_eq!(psnr_from_mse(1.0 / 24.0), 13.8021, epsilon = 1e-4);
    }

    #[test]
    fn png_round_trip_is_exact_at_8_bit() {
        // Arbitrary image quantized to the 8-bit grid must survive
        // save -> load bit-exactly.
        let mut img = RasterImage::filled(5, 3, Rgba::new(0.0, 0.0, 0.0, 1.0));
        let mut k = 0u32;
        for y in 0..3 {
            for x in 0..5 {
                let q = |v: u32| (v % 256) as f64 / 255.0;
                img.set_pixel(x, y, Rgba::new(q(k * 7), q(k * 13 + 5), q(k * 29 + 11), q(k + 200)));
                k += 1;
            }
        }
        let bytes = encode_png(&img);
        let back = load_png_bytes(&bytes).unwrap();
        assert_eq!(back, img);
    }

    proptest::proptest! {
        #[test]
        fn mse_is_symmetric(vals in proptest::collection::vec(0.0f64..=1.0, 24)) {
            let a = RasterImage::from_data(2, 3, vals.clone());
            let mut rev = vals;
            rev.reverse();
            let b = RasterImage::from_data(2, 3, rev);
            proptest::prop_assert_eq!(mse(&a, &b).unwrap(), mse(&b, &a).unwrap());
        }

        #[test]
        fn psnr_decreases_with_mse(m1 in 1e-9f64..1.0, m2 in 1e-9f64..1.0) {
            let (lo, hi) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
            if lo < hi {
                proptest::prop_assert!(psnr_from_mse(lo) > psnr_from_mse(hi));
            }
        }
    }
}
